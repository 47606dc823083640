//! Fixed-size vectors for terms and labels, built by averaging word vectors.

use crate::corpus::{tokenize, TextPipeline};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};

/// A term as read from a term list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermRecord {
    pub surface: String,
    pub tokens: Vec<String>,
    pub gold_label: Option<String>,
}

impl TermRecord {
    pub fn new(pipeline: &TextPipeline, surface: impl Into<String>, gold_label: Option<String>) -> Self {
        let surface = surface.into();
        TermRecord {
            tokens: pipeline.process(&surface),
            surface,
            gold_label,
        }
    }

    /// Key used for pre-composed vectors in an external table: the
    /// lower-cased surface tokens joined with `_`, e.g. `covered_bond`.
    pub fn external_key(&self) -> String {
        external_key(&self.surface)
    }
}

pub fn external_key(surface: &str) -> String {
    tokenize(surface)
        .iter()
        .map(|t| t.to_lowercase())
        .collect::<Vec<_>>()
        .join("_")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermVector {
    pub vector: Vec<f64>,
    /// Fraction of tokens (or sentences, for the contextual path) that
    /// contributed to `vector`.
    pub coverage: f64,
}

impl TermVector {
    pub fn zero(dim: usize) -> Self {
        TermVector {
            vector: vec![0.0; dim],
            coverage: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn is_covered(&self) -> bool {
        self.coverage > 0.0
    }
}

fn mean_of<'a>(dim: usize, rows: impl IntoIterator<Item = &'a [f64]>) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for row in rows {
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v;
        }
        n += 1;
    }
    (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
}

/// Mean of the in-vocabulary token vectors; repeated tokens count once per
/// occurrence. All-OOV input gives the zero vector with coverage 0.
pub fn embed_tokens(tokens: &[String], table: &EmbeddingTable) -> TermVector {
    let found: Vec<&[f64]> = tokens.iter().filter_map(|t| table.lookup(t)).collect();
    match mean_of(table.dim(), found.iter().copied()) {
        Some(vector) => TermVector {
            vector,
            coverage: found.len() as f64 / tokens.len() as f64,
        },
        None => TermVector::zero(table.dim()),
    }
}

pub fn embed_term(term: &TermRecord, table: &EmbeddingTable) -> TermVector {
    let v = embed_tokens(&term.tokens, table);
    if !v.is_covered() {
        log::debug!("term {:?} has no in-vocabulary token", term.surface);
    }
    v
}

pub fn embed_label(label_tokens: &[String], table: &EmbeddingTable) -> TermVector {
    let v = embed_tokens(label_tokens, table);
    if !v.is_covered() {
        log::warn!("label tokens {label_tokens:?} are out of vocabulary; using the zero vector");
    }
    v
}

/// Two-level mean: average the term's word vectors inside each sentence,
/// then average the per-sentence vectors. `sentences[i]` holds the vectors
/// of the term's words as they occur in sentence `i`. Sentences without
/// any vector are skipped; no usable sentence yields the zero vector.
pub fn embed_term_contextual(dim: usize, sentences: &[Vec<Vec<f64>>]) -> Result<TermVector> {
    let mut per_sentence = Vec::with_capacity(sentences.len());
    for words in sentences {
        if let Some(bad) = words.iter().find(|w| w.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        if let Some(m) = mean_of(dim, words.iter().map(Vec::as_slice)) {
            per_sentence.push(m);
        }
    }
    Ok(match mean_of(dim, per_sentence.iter().map(Vec::as_slice)) {
        Some(vector) => TermVector {
            vector,
            coverage: per_sentence.len() as f64 / sentences.len() as f64,
        },
        None => TermVector::zero(dim),
    })
}

/// Resolve a term against an external table: a pre-composed row under the
/// surface key, then under the normalized-token key, otherwise the average
/// of whatever word rows the table has.
pub fn embed_term_external(term: &TermRecord, table: &EmbeddingTable) -> TermVector {
    let keys = [term.external_key(), term.tokens.join("_")];
    for key in keys.iter().filter(|k| !k.is_empty()) {
        if let Some(row) = table.lookup(key) {
            return TermVector {
                vector: row.to_vec(),
                coverage: 1.0,
            };
        }
    }
    embed_term(term, table)
}
