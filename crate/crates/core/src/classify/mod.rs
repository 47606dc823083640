//! Label split rule, unsupervised rankers, Bernoulli naive Bayes, one-vs-rest
//! logistic regression and self-training augmentation.

mod labels;
mod logreg;
mod model_io;
mod naive_bayes;
mod rank;

pub use labels::{split_terms, Label, LabelSet, SplitResult};
pub use logreg::{lr_rank, train_logreg, BinaryFit, BinaryObjective, LogRegParams, LogisticRegressionModel};
pub use model_io::ClassifierModel;
pub use naive_bayes::{binarize, nb_rank, train_bernoulli_nb, NaiveBayesModel};
pub use rank::{cosine_similarity, l1_distance, l2_distance, rank_unsupervised, Measure, RankedPrediction};

use std::collections::HashSet;

use crate::termrep::TermRecord;

/// A term paired with a label index into the active [`LabelSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTerm {
    pub term: TermRecord,
    pub label: usize,
}

/// Append rule-labelled subset-1 terms to the training set. Terms whose
/// surface string already occurs are kept, with a warning.
pub fn augment_training(train: &[LabeledTerm], subset1: &[LabeledTerm]) -> Vec<LabeledTerm> {
    let seen: HashSet<&str> = train.iter().map(|t| t.term.surface.as_str()).collect();
    for extra in subset1 {
        if seen.contains(extra.term.surface.as_str()) {
            log::warn!("augmented training set repeats term {:?}", extra.term.surface);
        }
    }
    train.iter().chain(subset1).cloned().collect()
}
