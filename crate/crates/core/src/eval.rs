//! Metrics and end-to-end system runs.
//!
//! A system embeds every term, splits the test terms by label inclusion,
//! ranks each subset with its own classifier and reports mean rank and
//! accuracy per subset and over the whole test set.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    augment_training, binarize, rank_unsupervised, split_terms, train_bernoulli_nb, train_logreg, ClassifierModel,
    LabelSet, LabeledTerm, LogRegParams, Measure, RankedPrediction, SplitResult,
};
use crate::corpus::Corpus;
use crate::embedding::{train_word2vec, EmbeddingTable, TrainConfig};
use crate::error::{Error, Result};
use crate::termrep::{embed_label, embed_term, embed_term_external, TermRecord, TermVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub mean_rank: f64,
    pub accuracy: f64,
}

impl Metrics {
    /// From 1-based gold ranks.
    pub fn from_ranks(ranks: &[usize]) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::NoPredictions);
        }
        let n = ranks.len();
        let total: usize = ranks.iter().sum();
        let top = ranks.iter().filter(|&&r| r == 1).count();
        Ok(Metrics {
            n,
            mean_rank: total as f64 / n as f64,
            accuracy: top as f64 / n as f64,
        })
    }
}

/// 1-based position of each gold label in its prediction.
pub fn gold_ranks(predictions: &[RankedPrediction], gold: &[usize]) -> Result<Vec<usize>> {
    if predictions.len() != gold.len() {
        return Err(Error::Internal(format!(
            "{} predictions but {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    predictions
        .iter()
        .zip(gold)
        .map(|(p, &g)| p.rank_of(g).ok_or_else(|| Error::MissingGold(format!("#{g}"))))
        .collect()
}

pub fn mean_rank(predictions: &[RankedPrediction], gold: &[usize]) -> Result<f64> {
    Ok(Metrics::from_ranks(&gold_ranks(predictions, gold)?)?.mean_rank)
}

pub fn accuracy(predictions: &[RankedPrediction], gold: &[usize]) -> Result<f64> {
    Ok(Metrics::from_ranks(&gold_ranks(predictions, gold)?)?.accuracy)
}

/// A classification layer for one subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierSpec {
    Unsupervised(Measure),
    NaiveBayes,
    LogisticRegression,
}

impl ClassifierSpec {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierSpec::Unsupervised(m) => m.name(),
            ClassifierSpec::NaiveBayes => "naive_bayes",
            ClassifierSpec::LogisticRegression => "logistic_regression",
        }
    }

    pub fn is_supervised(self) -> bool {
        !matches!(self, ClassifierSpec::Unsupervised(_))
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cosine" => ClassifierSpec::Unsupervised(Measure::Cosine),
            "l1" => ClassifierSpec::Unsupervised(Measure::L1),
            "l2" => ClassifierSpec::Unsupervised(Measure::L2),
            "naive_bayes" | "nb" => ClassifierSpec::NaiveBayes,
            "logistic_regression" | "lr" => ClassifierSpec::LogisticRegression,
            other => {
                return Err(Error::Config(format!(
                    "unknown classifier {other:?} (expected cosine, l1, l2, naive_bayes or logistic_regression)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainPolicy {
    Original,
    /// Original training terms plus subset-1 test terms under their
    /// rule-matched label.
    Augmented,
}

impl FromStr for TrainPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(TrainPolicy::Original),
            "augmented" => Ok(TrainPolicy::Augmented),
            other => Err(Error::Config(format!(
                "unknown training policy {other:?} (expected original or augmented)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingSource {
    /// Skip-gram vectors trained on the corpus.
    Trained(TrainConfig),
    /// A table in the embedding text format whose rows must have `dim`
    /// entries. Rows may be keyed by whole terms (`covered_bond`).
    External { path: PathBuf, dim: usize },
}

impl EmbeddingSource {
    pub fn dim(&self) -> usize {
        match self {
            EmbeddingSource::Trained(c) => c.dim,
            EmbeddingSource::External { dim, .. } => *dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub name: String,
    pub embedding: EmbeddingSource,
    pub subset1: ClassifierSpec,
    pub subset2: ClassifierSpec,
    pub subset2_train: TrainPolicy,
    pub nb_alpha: f64,
    pub logreg: LogRegParams,
}

/// Embeddings resolved for a run.
#[derive(Debug, Clone)]
pub struct ResolvedEmbeddings {
    pub table: EmbeddingTable,
    pub external: bool,
    pub epoch_loss: Vec<f64>,
}

impl ResolvedEmbeddings {
    fn term_vector(&self, term: &TermRecord) -> TermVector {
        if self.external {
            embed_term_external(term, &self.table)
        } else {
            embed_term(term, &self.table)
        }
    }

    fn label_vector(&self, labels: &LabelSet, index: usize) -> TermVector {
        let label = labels.get(index);
        if self.external {
            let record = TermRecord {
                surface: label.id.clone(),
                tokens: label.tokens.clone(),
                gold_label: None,
            };
            embed_term_external(&record, &self.table)
        } else {
            embed_label(&label.tokens, &self.table)
        }
    }
}

/// Train or load the embedding table named by `source`.
pub fn resolve_embeddings(source: &EmbeddingSource, corpus: Option<&Corpus>) -> Result<ResolvedEmbeddings> {
    match source {
        EmbeddingSource::Trained(config) => {
            let corpus = corpus.ok_or_else(|| Error::Config("trained embeddings need a corpus".into()))?;
            let trained = train_word2vec(corpus, config)?;
            Ok(ResolvedEmbeddings {
                table: trained.table,
                external: false,
                epoch_loss: trained.epoch_loss,
            })
        }
        EmbeddingSource::External { path, dim } => {
            let table = EmbeddingTable::load(path)?;
            if table.dim() != *dim {
                return Err(Error::Config(format!(
                    "embedding file {} has dim {}, configuration expects dim {}",
                    path.display(),
                    table.dim(),
                    dim
                )));
            }
            Ok(ResolvedEmbeddings {
                table,
                external: true,
                epoch_loss: Vec::new(),
            })
        }
    }
}

/// One test term's outcome, serialized as a line of `predictions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermPrediction {
    pub term: String,
    pub subset: u8,
    pub matched: Vec<String>,
    pub rule_label: Option<String>,
    pub ranking: Vec<String>,
    pub scores: Vec<f64>,
    pub gold: Option<String>,
    pub gold_rank: Option<usize>,
    pub coverage: f64,
}

#[derive(Debug)]
pub struct SubsetRun {
    pub classifier: ClassifierSpec,
    pub terms: usize,
    /// Training-set size for supervised classifiers.
    pub train_size: Option<usize>,
    /// Metrics over the labelled terms; `Ok(None)` when none are labelled.
    pub outcome: Result<Option<Metrics>>,
    pub model: Option<ClassifierModel>,
}

impl SubsetRun {
    pub fn metrics(&self) -> Option<Metrics> {
        self.outcome.as_ref().ok().copied().flatten()
    }
}

#[derive(Debug)]
pub struct SystemRun {
    pub name: String,
    pub seed: u64,
    pub dim: usize,
    pub external: bool,
    pub vocab_size: usize,
    pub final_loss: Option<f64>,
    pub labels: usize,
    pub train_terms: usize,
    pub split: SplitResult,
    pub subset1: SubsetRun,
    pub subset2: SubsetRun,
    /// Over both subsets; `None` if either failed or nothing is labelled.
    pub combined: Option<Metrics>,
    /// Subset-1 terms whose rank-1 label equals the rule-matched label.
    pub rule_agreement: (usize, usize),
    pub uncovered_terms: usize,
    /// Test order; terms of a failed subset are absent.
    pub predictions: Vec<TermPrediction>,
}

impl SystemRun {
    pub fn failed(&self) -> Option<&Error> {
        self.subset1
            .outcome
            .as_ref()
            .err()
            .or(self.subset2.outcome.as_ref().err())
    }
}

/// Inputs shared by every system.
#[derive(Debug, Clone, Copy)]
pub struct SystemInputs<'a> {
    pub train: &'a [TermRecord],
    pub test: &'a [TermRecord],
    pub labels: &'a LabelSet,
    pub seed: u64,
    pub workers: usize,
}

fn labeled(terms: &[TermRecord], labels: &LabelSet) -> Result<Vec<LabeledTerm>> {
    terms
        .iter()
        .map(|t| {
            let id = t
                .gold_label
                .as_deref()
                .ok_or_else(|| Error::Config(format!("training term {:?} has no label", t.surface)))?;
            let label = labels.index_of(id).ok_or_else(|| Error::UnknownLabel(id.to_owned()))?;
            Ok(LabeledTerm { term: t.clone(), label })
        })
        .collect()
}

fn fit(
    spec: ClassifierSpec,
    train: &[LabeledTerm],
    embeddings: &ResolvedEmbeddings,
    labels: &LabelSet,
    config: &SystemConfig,
) -> Result<ClassifierModel> {
    let vectors: Vec<(Vec<f64>, usize)> = train
        .iter()
        .map(|t| (embeddings.term_vector(&t.term).vector, t.label))
        .collect();
    match spec {
        ClassifierSpec::NaiveBayes => {
            let bits: Vec<(Vec<bool>, usize)> = vectors.into_iter().map(|(v, l)| (binarize(&v, 0.0), l)).collect();
            Ok(train_bernoulli_nb(&bits, labels, config.nb_alpha)?.into())
        }
        ClassifierSpec::LogisticRegression => Ok(train_logreg(&vectors, labels, config.logreg)?.into()),
        ClassifierSpec::Unsupervised(_) => Err(Error::Internal("unsupervised rankers are not trained".into())),
    }
}

struct SubsetInputs<'a> {
    spec: ClassifierSpec,
    members: &'a [usize],
    train: Option<&'a [LabeledTerm]>,
}

fn run_subset(
    subset: SubsetInputs<'_>,
    test_vectors: &[TermVector],
    label_vectors: &[Vec<f64>],
    embeddings: &ResolvedEmbeddings,
    inputs: &SystemInputs<'_>,
    config: &SystemConfig,
    pool: &rayon::ThreadPool,
) -> (SubsetRun, Vec<(usize, RankedPrediction)>) {
    let mut run = SubsetRun {
        classifier: subset.spec,
        terms: subset.members.len(),
        train_size: subset.train.map(<[LabeledTerm]>::len),
        outcome: Ok(None),
        model: None,
    };
    let model = match (subset.spec, subset.train) {
        (ClassifierSpec::Unsupervised(_), _) => None,
        (_, _) if subset.members.is_empty() => None,
        (spec, Some(train)) => match fit(spec, train, embeddings, inputs.labels, config) {
            Ok(m) => Some(m),
            Err(e) => {
                run.outcome = Err(e);
                return (run, Vec::new());
            }
        },
        (_, None) => {
            run.outcome = Err(Error::Internal("supervised classifier without training data".into()));
            return (run, Vec::new());
        }
    };

    let ranked: Result<Vec<(usize, RankedPrediction)>> = pool.install(|| {
        subset
            .members
            .par_iter()
            .map(|&i| {
                let x = &test_vectors[i].vector;
                let prediction = match (&model, subset.spec) {
                    (Some(m), _) => m.rank(x),
                    (None, ClassifierSpec::Unsupervised(measure)) => rank_unsupervised(x, label_vectors, measure),
                    (None, _) => Err(Error::Internal("missing model".into())),
                }?;
                Ok((i, prediction))
            })
            .collect()
    });
    let ranked = match ranked {
        Ok(r) => r,
        Err(e) => {
            run.outcome = Err(e);
            return (run, Vec::new());
        }
    };

    let mut ranks = Vec::new();
    for (i, p) in &ranked {
        if let Some(gold) = inputs.test[*i].gold_label.as_deref() {
            match inputs.labels.index_of(gold).and_then(|g| p.rank_of(g)) {
                Some(r) => ranks.push(r),
                None => {
                    run.outcome = Err(Error::UnknownLabel(gold.to_owned()));
                    return (run, Vec::new());
                }
            }
        }
    }
    run.outcome = Ok(if ranks.is_empty() {
        None
    } else {
        Some(Metrics::from_ranks(&ranks).expect("non-empty ranks"))
    });
    run.model = model;
    (run, ranked)
}

/// Run one system over already resolved embeddings.
pub fn run_system_with(
    config: &SystemConfig,
    embeddings: &ResolvedEmbeddings,
    inputs: &SystemInputs<'_>,
) -> Result<SystemRun> {
    let labels = inputs.labels;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(inputs.workers.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;

    let train = labeled(inputs.train, labels)?;
    for t in inputs.test {
        if let Some(g) = t.gold_label.as_deref() {
            if labels.index_of(g).is_none() {
                return Err(Error::UnknownLabel(g.to_owned()));
            }
        }
    }
    let test_vectors: Vec<TermVector> =
        pool.install(|| inputs.test.par_iter().map(|t| embeddings.term_vector(t)).collect());
    let label_vectors: Vec<Vec<f64>> = (0..labels.len())
        .map(|i| embeddings.label_vector(labels, i).vector)
        .collect();
    let split = split_terms(inputs.test, labels);

    let subset1_train = config.subset1.is_supervised().then_some(train.as_slice());
    let (subset1, ranked1) = run_subset(
        SubsetInputs {
            spec: config.subset1,
            members: &split.subset1,
            train: subset1_train,
        },
        &test_vectors,
        &label_vectors,
        embeddings,
        inputs,
        config,
        &pool,
    );

    let augmented: Vec<LabeledTerm>;
    let subset2_train = match config.subset2_train {
        TrainPolicy::Original => train.as_slice(),
        TrainPolicy::Augmented => {
            let extra: Vec<LabeledTerm> = split
                .subset1
                .iter()
                .map(|&i| LabeledTerm {
                    term: inputs.test[i].clone(),
                    label: split.rule_label(i).expect("subset 1 has one match"),
                })
                .collect();
            augmented = augment_training(&train, &extra);
            augmented.as_slice()
        }
    };
    let (subset2, ranked2) = run_subset(
        SubsetInputs {
            spec: config.subset2,
            members: &split.subset2,
            train: config.subset2.is_supervised().then_some(subset2_train),
        },
        &test_vectors,
        &label_vectors,
        embeddings,
        inputs,
        config,
        &pool,
    );

    let rule_agreement = (
        ranked1
            .iter()
            .filter(|(i, p)| split.rule_label(*i) == Some(p.top()))
            .count(),
        ranked1.len(),
    );

    let mut by_term: Vec<Option<(u8, RankedPrediction)>> = vec![None; inputs.test.len()];
    for (subset, ranked) in [(1u8, ranked1), (2u8, ranked2)] {
        for (i, p) in ranked {
            by_term[i] = Some((subset, p));
        }
    }
    let mut predictions = Vec::new();
    let mut all_ranks = Vec::new();
    for (i, slot) in by_term.into_iter().enumerate() {
        let Some((subset, p)) = slot else { continue };
        let term = &inputs.test[i];
        let gold_rank = term
            .gold_label
            .as_deref()
            .and_then(|g| labels.index_of(g))
            .and_then(|g| p.rank_of(g));
        all_ranks.extend(gold_rank);
        predictions.push(TermPrediction {
            term: term.surface.clone(),
            subset,
            matched: split.matches[i].iter().map(|&l| labels.id(l).to_owned()).collect(),
            rule_label: split.rule_label(i).map(|l| labels.id(l).to_owned()),
            ranking: p.ranking.iter().map(|&l| labels.id(l).to_owned()).collect(),
            scores: p.scores.clone(),
            gold: term.gold_label.clone(),
            gold_rank,
            coverage: test_vectors[i].coverage,
        });
    }

    let both_ok = subset1.outcome.is_ok() && subset2.outcome.is_ok();
    let combined = if both_ok {
        Metrics::from_ranks(&all_ranks).ok()
    } else {
        None
    };

    Ok(SystemRun {
        name: config.name.clone(),
        seed: inputs.seed,
        dim: embeddings.table.dim(),
        external: embeddings.external,
        vocab_size: embeddings.table.len(),
        final_loss: embeddings.epoch_loss.last().copied(),
        labels: labels.len(),
        train_terms: inputs.train.len(),
        uncovered_terms: test_vectors.iter().filter(|v| !v.is_covered()).count(),
        split,
        subset1,
        subset2,
        combined,
        rule_agreement,
        predictions,
    })
}

/// Resolve embeddings, then run the system.
pub fn run_system(config: &SystemConfig, corpus: Option<&Corpus>, inputs: &SystemInputs<'_>) -> Result<SystemRun> {
    let embeddings = resolve_embeddings(&config.embedding, corpus)?;
    run_system_with(config, &embeddings, inputs)
}

fn metric_cells(m: Option<Metrics>) -> (String, String, String) {
    match m {
        Some(m) => (
            m.n.to_string(),
            format!("{:.4}", m.mean_rank),
            format!("{:.4}", m.accuracy),
        ),
        None => ("0".into(), "-".into(), "-".into()),
    }
}

impl SystemRun {
    /// Aligned plain-text report.
    pub fn render_report(&self) -> String {
        let mut out = String::new();
        let embedding = if self.external {
            format!("external table, dim {} ({} rows)", self.dim, self.vocab_size)
        } else {
            let loss = self.final_loss.map_or("-".to_owned(), |l| format!("{l:.6}"));
            format!(
                "word2vec skip-gram, dim {} (vocab {}, final loss {})",
                self.dim, self.vocab_size, loss
            )
        };
        let _ = writeln!(out, "system      {}", self.name);
        let _ = writeln!(out, "seed        {}", self.seed);
        let _ = writeln!(out, "embedding   {embedding}");
        let _ = writeln!(out, "labels      {}", self.labels);
        let _ = writeln!(out, "train terms {}", self.train_terms);
        let _ = writeln!(out, "test terms  {}", self.split.matches.len());
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<10} {:<20} {:>6} {:>6} {:>6} {:>8} {:>8}",
            "subset", "classifier", "#train", "terms", "scored", "MR", "ACC"
        );
        for (name, run) in [("subset 1", &self.subset1), ("subset 2", &self.subset2)] {
            let train = run.train_size.map_or("-".to_owned(), |n| n.to_string());
            match &run.outcome {
                Ok(m) => {
                    let (n, mr, acc) = metric_cells(*m);
                    let _ = writeln!(
                        out,
                        "{:<10} {:<20} {:>6} {:>6} {:>6} {:>8} {:>8}",
                        name, run.classifier, train, run.terms, n, mr, acc
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        out,
                        "{:<10} {:<20} {:>6} {:>6} FAILED: {}",
                        name, run.classifier, train, run.terms, e
                    );
                }
            }
        }
        let (n, mr, acc) = metric_cells(self.combined);
        let _ = writeln!(
            out,
            "{:<10} {:<20} {:>6} {:>6} {:>6} {:>8} {:>8}",
            "combined",
            "",
            "",
            self.split.matches.len(),
            n,
            mr,
            acc
        );
        let _ = writeln!(out);
        let [zero, one, many] = self.split.count_table();
        let _ = writeln!(out, "labels within term: 0 -> {zero}, 1 -> {one}, 2+ -> {many}");
        let _ = writeln!(
            out,
            "subset 1 rule agreement: {}/{} rank-1 predictions equal the contained label",
            self.rule_agreement.0, self.rule_agreement.1
        );
        let _ = writeln!(out, "test terms without embedding coverage: {}", self.uncovered_terms);
        out
    }

    /// One JSON object per line, in test order.
    pub fn render_predictions(&self) -> String {
        self.predictions
            .iter()
            .map(|p| serde_json::to_string(p).expect("prediction serializes") + "\n")
            .collect()
    }

    pub fn metrics_summary(&self) -> MetricsSummary {
        MetricsSummary {
            system: self.name.clone(),
            seed: self.seed,
            subset1: self.subset1.metrics(),
            subset2: self.subset2.metrics(),
            combined: self.combined,
        }
    }
}

/// Machine-readable metrics, written as `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub system: String,
    pub seed: u64,
    pub subset1: Option<Metrics>,
    pub subset2: Option<Metrics>,
    pub combined: Option<Metrics>,
}

/// Recompute metrics from `predictions.jsonl` records, using each record's
/// ranking and gold label. Returns `[subset1, subset2, combined]`.
pub fn evaluate_records(records: &[TermPrediction]) -> Result<[Option<Metrics>; 3]> {
    let mut ranks: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for r in records {
        let Some(gold) = r.gold.as_deref() else { continue };
        let rank = r
            .ranking
            .iter()
            .position(|l| l == gold)
            .ok_or_else(|| Error::MissingGold(gold.to_owned()))?
            + 1;
        match r.subset {
            1 | 2 => ranks[usize::from(r.subset - 1)].push(rank),
            other => return Err(Error::Internal(format!("invalid subset {other} for {:?}", r.term))),
        }
    }
    let all: Vec<usize> = ranks.concat();
    Ok([
        Metrics::from_ranks(&ranks[0]).ok(),
        Metrics::from_ranks(&ranks[1]).ok(),
        Metrics::from_ranks(&all).ok(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextPipeline;

    fn pred(ranking: &[usize]) -> RankedPrediction {
        RankedPrediction {
            ranking: ranking.to_vec(),
            scores: (0..ranking.len()).map(|i| -(i as f64)).collect(),
        }
    }

    #[test]
    fn mean_rank_examples() {
        let preds = [pred(&[0, 1, 2]), pred(&[1, 0, 2]), pred(&[2, 0, 1])];
        let gold = [0, 1, 1];
        assert!((mean_rank(&preds, &gold).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        assert!((accuracy(&preds, &gold).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(mean_rank(&preds, &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&preds, &[2, 2, 0]).unwrap(), 0.0);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(Metrics::from_ranks(&[]), Err(Error::NoPredictions)));
        assert!(matches!(mean_rank(&[pred(&[0, 1])], &[5]), Err(Error::MissingGold(_))));
        assert!(mean_rank(&[pred(&[0, 1])], &[0, 1]).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            "l2".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::Unsupervised(Measure::L2)
        );
        assert_eq!(
            "naive_bayes".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::NaiveBayes
        );
        assert!("svm".parse::<ClassifierSpec>().is_err());
        assert_eq!("augmented".parse::<TrainPolicy>().unwrap(), TrainPolicy::Augmented);
        assert!("both".parse::<TrainPolicy>().is_err());
    }

    fn fixture() -> (LabelSet, Vec<TermRecord>, Vec<TermRecord>, ResolvedEmbeddings) {
        let p = TextPipeline::default();
        let labels = LabelSet::from_names(&p, &["Bonds", "Swap", "Option"]).unwrap();
        let rec = |s: &str, l: &str| TermRecord::new(&p, s, Some(l.to_owned()));
        let train = vec![
            rec("Debenture", "Bonds"),
            rec("Gilt", "Bonds"),
            rec("Basis Swap", "Swap"),
            rec("Tenor basis", "Swap"),
            rec("Swaption straddle", "Option"),
            rec("Call", "Option"),
        ];
        let test = vec![
            rec("Covered Bond", "Bonds"),
            rec("Coupon Gilt", "Bonds"),
            rec("Tenor", "Swap"),
            rec("Barrier Option", "Option"),
            rec("Straddle", "Option"),
        ];
        let table = EmbeddingTable::from_rows(
            3,
            [
                ("bond", vec![1.0, 0.0, 0.0]),
                ("debentur", vec![0.9, 0.1, 0.0]),
                ("gilt", vec![0.8, -0.1, 0.1]),
                ("coupon", vec![0.7, 0.0, 0.2]),
                ("cover", vec![0.5, 0.2, 0.0]),
                ("swap", vec![0.0, 1.0, 0.0]),
                ("basi", vec![0.1, 0.9, 0.0]),
                ("tenor", vec![-0.1, 0.8, 0.1]),
                ("option", vec![0.0, 0.0, 1.0]),
                ("swaption", vec![0.0, 0.3, 0.8]),
                ("straddl", vec![0.1, -0.2, 0.9]),
                ("call", vec![0.0, 0.1, 0.7]),
                ("barrier", vec![0.2, 0.0, 0.6]),
            ],
        )
        .unwrap();
        let emb = ResolvedEmbeddings {
            table,
            external: false,
            epoch_loss: vec![],
        };
        (labels, train, test, emb)
    }

    fn config(subset1: ClassifierSpec, subset2: ClassifierSpec, policy: TrainPolicy) -> SystemConfig {
        SystemConfig {
            name: "test".into(),
            embedding: EmbeddingSource::External {
                path: "unused".into(),
                dim: 3,
            },
            subset1,
            subset2,
            subset2_train: policy,
            nb_alpha: 1.0,
            logreg: LogRegParams::default(),
        }
    }

    #[test]
    fn system_run_combines_subsets() {
        let (labels, train, test, emb) = fixture();
        let inputs = SystemInputs {
            train: &train,
            test: &test,
            labels: &labels,
            seed: 7,
            workers: 2,
        };
        for (s1, s2) in [
            (ClassifierSpec::Unsupervised(Measure::L2), ClassifierSpec::NaiveBayes),
            (ClassifierSpec::LogisticRegression, ClassifierSpec::LogisticRegression),
            (
                ClassifierSpec::Unsupervised(Measure::Cosine),
                ClassifierSpec::Unsupervised(Measure::L1),
            ),
        ] {
            let run = run_system_with(&config(s1, s2, TrainPolicy::Augmented), &emb, &inputs).unwrap();
            assert_eq!(run.split.subset1, [0, 3]);
            assert_eq!(run.subset2.train_size, s2.is_supervised().then_some(8));
            let (m1, m2, c) = (
                run.subset1.metrics().unwrap(),
                run.subset2.metrics().unwrap(),
                run.combined.unwrap(),
            );
            let weighted = (m1.n as f64 * m1.mean_rank + m2.n as f64 * m2.mean_rank) / (m1.n + m2.n) as f64;
            assert!((weighted - c.mean_rank).abs() < 1e-12);
            assert_eq!(c.n, 5);
            assert_eq!(run.predictions.len(), 5);
            let recomputed = evaluate_records(&run.predictions).unwrap();
            assert_eq!(recomputed, [Some(m1), Some(m2), Some(c)]);
        }
    }

    #[test]
    fn failed_subset_keeps_the_other() {
        let (labels, train, test, emb) = fixture();
        let one_class: Vec<TermRecord> = train
            .into_iter()
            .filter(|t| t.gold_label.as_deref() == Some("Bonds"))
            .collect();
        let inputs = SystemInputs {
            train: &one_class,
            test: &test,
            labels: &labels,
            seed: 7,
            workers: 1,
        };
        let cfg = config(
            ClassifierSpec::Unsupervised(Measure::L2),
            ClassifierSpec::LogisticRegression,
            TrainPolicy::Original,
        );
        let run = run_system_with(&cfg, &emb, &inputs).unwrap();
        assert!(run.subset1.metrics().is_some());
        assert!(matches!(run.subset2.outcome, Err(Error::SingleClass(_))));
        assert!(run.combined.is_none());
        assert!(run.failed().is_some());
        assert_eq!(run.predictions.len(), 2);
        assert!(run.render_report().contains("FAILED"));
    }

    #[test]
    fn unknown_gold_label_is_rejected() {
        let (labels, train, mut test, emb) = fixture();
        test[0].gold_label = Some("Futures".into());
        let inputs = SystemInputs {
            train: &train,
            test: &test,
            labels: &labels,
            seed: 1,
            workers: 1,
        };
        let cfg = config(
            ClassifierSpec::Unsupervised(Measure::L2),
            ClassifierSpec::NaiveBayes,
            TrainPolicy::Original,
        );
        assert!(matches!(
            run_system_with(&cfg, &emb, &inputs),
            Err(Error::UnknownLabel(_))
        ));
    }
}
