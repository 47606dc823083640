use super::labels::LabelSet;
use super::rank::RankedPrediction;
use crate::error::{Error, Result};

/// `x_j > threshold`, strictly.
pub fn binarize(x: &[f64], threshold: f64) -> Vec<bool> {
    x.iter().map(|&v| v > threshold).collect()
}

/// Bernoulli naive Bayes over binarized embedding dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub labels: LabelSet,
    pub alpha: f64,
    pub threshold: f64,
    pub class_log_prior: Vec<f64>,
    /// `[class][feature]` log P(x_j = 1 | c).
    pub log_p1: Vec<Vec<f64>>,
    /// `[class][feature]` log P(x_j = 0 | c).
    pub log_p0: Vec<Vec<f64>>,
}

impl NaiveBayesModel {
    pub fn dim(&self) -> usize {
        self.log_p1.first().map_or(0, Vec::len)
    }

    /// Joint log-likelihood of each class for a bit vector.
    pub fn joint_log_likelihood(&self, bits: &[bool]) -> Result<Vec<f64>> {
        if bits.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: bits.len(),
            });
        }
        Ok((0..self.labels.len())
            .map(|c| {
                let features: f64 = bits
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| if b { self.log_p1[c][j] } else { self.log_p0[c][j] })
                    .sum();
                self.class_log_prior[c] + features
            })
            .collect())
    }

    pub fn rank_bits(&self, bits: &[bool]) -> Result<RankedPrediction> {
        Ok(RankedPrediction::from_scores(self.joint_log_likelihood(bits)?))
    }
}

/// Fit with Laplace/Lidstone smoothing `alpha`. Labels are indices into
/// `labels`; classes without examples get their prior from smoothing alone.
pub fn train_bernoulli_nb(examples: &[(Vec<bool>, usize)], labels: &LabelSet, alpha: f64) -> Result<NaiveBayesModel> {
    let Some((first, _)) = examples.first() else {
        return Err(Error::EmptyTrainingSet);
    };
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    let dim = first.len();
    let k = labels.len();
    let mut class_count = vec![0usize; k];
    let mut feature_count = vec![vec![0usize; dim]; k];
    for (bits, label) in examples {
        if bits.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bits.len(),
            });
        }
        if *label >= k {
            return Err(Error::UnknownLabel(format!("#{label}")));
        }
        class_count[*label] += 1;
        for (count, &b) in feature_count[*label].iter_mut().zip(bits) {
            *count += usize::from(b);
        }
    }

    let n = examples.len() as f64;
    let class_log_prior = class_count
        .iter()
        .map(|&c| ((c as f64 + alpha) / (n + alpha * k as f64)).ln())
        .collect();
    let mut log_p1 = Vec::with_capacity(k);
    let mut log_p0 = Vec::with_capacity(k);
    for c in 0..k {
        let denom = class_count[c] as f64 + 2.0 * alpha;
        log_p1.push(
            feature_count[c]
                .iter()
                .map(|&f| ((f as f64 + alpha) / denom).ln())
                .collect(),
        );
        log_p0.push(
            feature_count[c]
                .iter()
                .map(|&f| (((class_count[c] - f) as f64 + alpha) / denom).ln())
                .collect(),
        );
    }
    Ok(NaiveBayesModel {
        labels: labels.clone(),
        alpha,
        threshold: 0.0,
        class_log_prior,
        log_p1,
        log_p0,
    })
}

/// Binarize `x` at the model threshold and rank classes by joint
/// log-likelihood.
pub fn nb_rank(model: &NaiveBayesModel, x: &[f64]) -> Result<RankedPrediction> {
    model.rank_bits(&binarize(x, model.threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextPipeline;

    fn labels(names: &[&str]) -> LabelSet {
        LabelSet::from_names(&TextPipeline::default(), names).unwrap()
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize(&[0.5, -0.2, 0.0], 0.0), [true, false, false]);
        assert_eq!(binarize(&[-1.0, -3.0], 0.0), [false, false]);
        assert_eq!(binarize(&[-0.5, 0.5], -1.0), [true, true]);
    }

    #[test]
    fn laplace_arithmetic() {
        let ls = labels(&["Bonds", "Swap"]);
        let model = train_bernoulli_nb(&[(vec![true], 0), (vec![false], 1)], &ls, 1.0).unwrap();
        assert!((model.log_p1[0][0].exp() - 2.0 / 3.0).abs() < 1e-15);
        assert!((model.log_p1[1][0].exp() - 1.0 / 3.0).abs() < 1e-15);
        assert!((model.class_log_prior[0].exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_class_prior() {
        let ls = labels(&["Bonds", "Swap"]);
        let n = 5;
        let ex: Vec<_> = (0..n).map(|i| (vec![i % 2 == 0, true], 0)).collect();
        let model = train_bernoulli_nb(&ex, &ls, 1.0).unwrap();
        let expected = (n as f64 + 1.0) / (n as f64 + 2.0);
        assert!((model.class_log_prior[0].exp() - expected).abs() < 1e-15);
    }

    #[test]
    fn probabilities_are_complementary() {
        let ls = labels(&["Bonds", "Swap", "Option"]);
        let ex = vec![
            (vec![true, false, true], 0),
            (vec![true, true, true], 0),
            (vec![false, false, true], 1),
        ];
        let model = train_bernoulli_nb(&ex, &ls, 1.0).unwrap();
        for c in 0..3 {
            for j in 0..3 {
                let total = model.log_p1[c][j].exp() + model.log_p0[c][j].exp();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_data_symmetric_parameters() {
        let ls = labels(&["Bonds", "Swap"]);
        let ex = vec![(vec![true, false], 0), (vec![false, true], 1)];
        let m = train_bernoulli_nb(&ex, &ls, 1.0).unwrap();
        assert_eq!(m.class_log_prior[0], m.class_log_prior[1]);
        assert_eq!(m.log_p1[0][0], m.log_p1[1][1]);
        assert_eq!(m.log_p1[0][1], m.log_p1[1][0]);
    }

    #[test]
    fn uniform_model_ranks_in_label_order() {
        let ls = labels(&["Bonds", "Swap", "Option"]);
        let ex = vec![(vec![true, false], 0), (vec![true, false], 1), (vec![true, false], 2)];
        let m = train_bernoulli_nb(&ex, &ls, 1.0).unwrap();
        assert_eq!(nb_rank(&m, &[1.0, -1.0]).unwrap().ranking, [0, 1, 2]);
        assert_eq!(nb_rank(&m, &[0.0, 0.0]).unwrap().ranking, [0, 1, 2]);
    }

    #[test]
    fn separable_example_ranks_first() {
        let ls = labels(&["Bonds", "Swap", "Option"]);
        let ex = vec![
            (vec![true, true, false, false], 0),
            (vec![false, false, true, true], 1),
            (vec![true, false, true, false], 2),
        ];
        let m = train_bernoulli_nb(&ex, &ls, 1.0).unwrap();
        for (bits, label) in &ex {
            assert_eq!(m.rank_bits(bits).unwrap().top(), *label);
        }
    }

    #[test]
    fn errors() {
        let ls = labels(&["Bonds", "Swap"]);
        assert!(matches!(
            train_bernoulli_nb(&[], &ls, 1.0),
            Err(Error::EmptyTrainingSet)
        ));
        assert!(train_bernoulli_nb(&[(vec![true], 0), (vec![true, false], 1)], &ls, 1.0).is_err());
        let m = train_bernoulli_nb(&[(vec![true], 0)], &ls, 1.0).unwrap();
        assert!(matches!(nb_rank(&m, &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }
}
