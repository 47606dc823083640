use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A full ordering of every label for one term.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPrediction {
    /// Label indices, best first.
    pub ranking: Vec<usize>,
    /// Score of `ranking[i]`; non-increasing.
    pub scores: Vec<f64>,
}

impl RankedPrediction {
    /// Rank labels by descending score; equal scores keep label order.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        Self::from_keys(&scores, scores.clone())
    }

    /// Sort by `keys` (descending, stable) but report `scores`. Used when
    /// the reported score is a saturating transform of the sort key.
    pub(crate) fn from_keys(keys: &[f64], scores: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..keys.len()).collect();
        ranking.sort_by(|&a, &b| keys[b].partial_cmp(&keys[a]).unwrap_or(Ordering::Equal));
        let scores = ranking.iter().map(|&i| scores[i]).collect();
        RankedPrediction { ranking, scores }
    }

    pub fn top(&self) -> usize {
        self.ranking[0]
    }

    /// 1-based position of `label`.
    pub fn rank_of(&self, label: usize) -> Option<usize> {
        self.ranking.iter().position(|&l| l == label).map(|p| p + 1)
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Cosine,
    L1,
    L2,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Cosine => "cosine",
            Measure::L1 => "l1",
            Measure::L2 => "l2",
        }
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        })
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Rank labels by similarity to `term`. Distances are stored negated so
/// that scores are non-increasing for every measure.
pub fn rank_unsupervised<V: AsRef<[f64]>>(term: &[f64], labels: &[V], measure: Measure) -> Result<RankedPrediction> {
    let scores = labels
        .iter()
        .map(|l| {
            let l = l.as_ref();
            match measure {
                Measure::Cosine => cosine_similarity(term, l),
                Measure::L1 => l1_distance(term, l).map(|d| -d),
                Measure::L2 => l2_distance(term, l).map(|d| -d),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankedPrediction::from_scores(scores))
}
