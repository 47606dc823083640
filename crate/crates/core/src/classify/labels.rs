use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::corpus::{find_subsequence, TextPipeline};
use crate::error::{Error, Result};
use crate::termrep::TermRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Ordered, mutually exclusive class labels. The order is the tie-break
/// authority for every ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<Label>,
}

impl LabelSet {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Config("label set is empty".into()));
        }
        let mut ids = HashSet::new();
        let mut seqs = HashSet::new();
        for label in &labels {
            if label.id.trim().is_empty() || label.id.contains(['\t', '\n']) {
                return Err(Error::Config(format!("invalid label identifier {:?}", label.id)));
            }
            if label.tokens.is_empty() {
                return Err(Error::Config(format!(
                    "label {:?} has no tokens after normalization",
                    label.id
                )));
            }
            if !ids.insert(label.id.as_str()) {
                return Err(Error::Config(format!("duplicate label {:?}", label.id)));
            }
            if !seqs.insert(label.tokens.as_slice()) {
                return Err(Error::Config(format!(
                    "label {:?} normalizes to the same tokens as another label",
                    label.id
                )));
            }
        }
        Ok(LabelSet { labels })
    }

    pub fn from_names<S: AsRef<str>>(pipeline: &TextPipeline, names: &[S]) -> Result<Self> {
        Self::new(
            names
                .iter()
                .map(|n| Label {
                    id: n.as_ref().trim().to_owned(),
                    tokens: pipeline.process(n.as_ref()),
                })
                .collect(),
        )
    }

    /// One label per line; `#` comments and blank lines are ignored.
    pub fn load(pipeline: &TextPipeline, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let names: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self::from_names(pipeline, &names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, index: usize) -> &Label {
        &self.labels[index]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Label> {
        self.labels.iter()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.id == id)
    }

    pub fn id(&self, index: usize) -> &str {
        &self.labels[index].id
    }

    /// Labels whose token sequence occurs contiguously in `tokens`.
    pub fn matches(&self, tokens: &[String]) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| find_subsequence(tokens, &l.tokens).is_some())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Partition of a term list by how many labels each term contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    /// Indices of terms containing exactly one label.
    pub subset1: Vec<usize>,
    /// Indices of terms containing zero or several labels.
    pub subset2: Vec<usize>,
    /// Per input term, the matched label indices.
    pub matches: Vec<Vec<usize>>,
}

impl SplitResult {
    /// The single matched label of a subset-1 term.
    pub fn rule_label(&self, term: usize) -> Option<usize> {
        match self.matches[term].as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }

    /// Term counts with 0, 1 and 2+ matched labels.
    pub fn count_table(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for m in &self.matches {
            counts[m.len().min(2)] += 1;
        }
        counts
    }
}

pub fn split_terms(terms: &[TermRecord], labels: &LabelSet) -> SplitResult {
    let matches: Vec<Vec<usize>> = terms.iter().map(|t| labels.matches(&t.tokens)).collect();
    let (subset1, subset2) = (0..terms.len()).partition(|&i| matches[i].len() == 1);
    SplitResult {
        subset1,
        subset2,
        matches,
    }
}
