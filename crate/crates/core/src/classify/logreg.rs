use super::labels::LabelSet;
use super::rank::RankedPrediction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegParams {
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1.0,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z)
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Binary logistic loss for one class against the rest:
///
/// `J(w, b) = (1/N) sum_i [softplus(z_i) - y_i z_i] + (l2 / 2N) |w|^2`
/// with `z_i = w . x_i + b`. The intercept is not penalized.
#[derive(Debug, Clone, Copy)]
pub struct BinaryObjective<'a> {
    pub features: &'a [Vec<f64>],
    pub targets: &'a [bool],
    pub l2: f64,
}

impl BinaryObjective<'_> {
    fn n(&self) -> f64 {
        self.features.len() as f64
    }

    fn logit(w: &[f64], b: f64, x: &[f64]) -> f64 {
        b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()
    }

    pub fn value(&self, w: &[f64], b: f64) -> f64 {
        let data: f64 = self
            .features
            .iter()
            .zip(self.targets)
            .map(|(x, &y)| {
                let z = Self::logit(w, b, x);
                softplus(z) - if y { z } else { 0.0 }
            })
            .sum();
        let penalty: f64 = w.iter().map(|v| v * v).sum();
        data / self.n() + 0.5 * self.l2 * penalty / self.n()
    }

    /// Gradient with respect to `(w, b)`.
    pub fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.n();
        let mut gw: Vec<f64> = w.iter().map(|v| self.l2 * v / n).collect();
        let mut gb = 0.0;
        for (x, &y) in self.features.iter().zip(self.targets) {
            let r = (sigmoid(Self::logit(w, b, x)) - f64::from(u8::from(y))) / n;
            for (g, xi) in gw.iter_mut().zip(x) {
                *g += r * xi;
            }
            gb += r;
        }
        (gw, gb)
    }
}

/// Outcome of [`BinaryObjective::fit`].
#[derive(Debug, Clone)]
pub struct BinaryFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value at the start and after every accepted step.
    pub trace: Vec<f64>,
}

impl BinaryObjective<'_> {
    /// Diagonal upper bound of the Hessian: `sum_i x_ij^2 / 4N + l2/N` for
    /// weights and `1/4` for the intercept.
    fn preconditioner(&self) -> (Vec<f64>, f64) {
        let dim = self.features.first().map_or(0, Vec::len);
        let n = self.n();
        let mut diag = vec![self.l2 / n; dim];
        for x in self.features {
            for (d, xi) in diag.iter_mut().zip(x) {
                *d += xi * xi / (4.0 * n);
            }
        }
        for d in &mut diag {
            *d = d.max(1e-12);
        }
        (diag, 0.25)
    }

    /// Full-batch gradient descent from zero, scaled by a diagonal
    /// preconditioner, with Armijo backtracking. Stops when the gradient's
    /// max-norm drops below `tol`.
    pub fn fit(&self, max_iters: usize, tol: f64) -> BinaryFit {
        let dim = self.features.first().map_or(0, Vec::len);
        let (diag_w, diag_b) = self.preconditioner();
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        let mut value = self.value(&w, b);
        let mut trace = vec![value];
        let mut step: f64 = 1.0;
        let mut converged = false;
        let mut iterations = 0;

        while iterations < max_iters {
            let (gw, gb) = self.gradient(&w, b);
            let max_abs = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
            if max_abs < tol {
                converged = true;
                break;
            }
            let dir_w: Vec<f64> = gw.iter().zip(&diag_w).map(|(g, d)| g / d).collect();
            let dir_b = gb / diag_b;
            let decrease = gw.iter().zip(&dir_w).map(|(g, d)| g * d).sum::<f64>() + gb * dir_b;
            iterations += 1;

            step = (step * 2.0).min(4.0);
            let accepted = loop {
                let cand_w: Vec<f64> = w.iter().zip(&dir_w).map(|(v, d)| v - step * d).collect();
                let cand_b = b - step * dir_b;
                let cand_value = self.value(&cand_w, cand_b);
                if cand_value <= value - 0.5 * step * decrease {
                    break Some((cand_w, cand_b, cand_value));
                }
                step *= 0.5;
                if step < 1e-20 {
                    break None;
                }
            };
            let Some((nw, nb, nv)) = accepted else {
                break;
            };
            w = nw;
            b = nb;
            value = nv;
            trace.push(value);
        }
        BinaryFit {
            weights: w,
            intercept: b,
            iterations,
            converged,
            trace,
        }
    }
}

/// One independent binary classifier per label.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegressionModel {
    pub labels: LabelSet,
    pub l2: f64,
    /// `[class][feature]`
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

impl LogisticRegressionModel {
    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, &b)| BinaryObjective::logit(w, b, x))
            .collect())
    }
}

pub fn train_logreg(
    examples: &[(Vec<f64>, usize)],
    labels: &LabelSet,
    params: LogRegParams,
) -> Result<LogisticRegressionModel> {
    let Some((first, _)) = examples.first() else {
        return Err(Error::EmptyTrainingSet);
    };
    let valid = params.l2.is_finite() && params.l2 >= 0.0 && params.max_iters > 0 && params.tol > 0.0;
    if !valid {
        return Err(Error::Config(format!(
            "invalid logistic regression parameters {params:?}"
        )));
    }
    let dim = first.len();
    for (i, (x, label)) in examples.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if *label >= labels.len() {
            return Err(Error::UnknownLabel(format!("#{label}")));
        }
    }
    let first_label = examples[0].1;
    if examples.iter().all(|(_, l)| *l == first_label) {
        return Err(Error::SingleClass(labels.id(first_label).to_owned()));
    }

    let features: Vec<Vec<f64>> = examples.iter().map(|(x, _)| x.clone()).collect();
    let mut weights = Vec::with_capacity(labels.len());
    let mut intercepts = Vec::with_capacity(labels.len());
    for class in 0..labels.len() {
        let targets: Vec<bool> = examples.iter().map(|(_, l)| *l == class).collect();
        let objective = BinaryObjective {
            features: &features,
            targets: &targets,
            l2: params.l2,
        };
        let fit = objective.fit(params.max_iters, params.tol);
        if !fit.converged {
            log::debug!(
                "logistic regression for {:?} stopped after {} iterations",
                labels.id(class),
                fit.iterations
            );
        }
        weights.push(fit.weights);
        intercepts.push(fit.intercept);
    }
    Ok(LogisticRegressionModel {
        labels: labels.clone(),
        l2: params.l2,
        weights,
        intercepts,
    })
}

/// Scores are per-class sigmoid probabilities; ordering follows the
/// logits so saturation cannot create artificial ties.
pub fn lr_rank(model: &LogisticRegressionModel, x: &[f64]) -> Result<RankedPrediction> {
    let logits = model.logits(x)?;
    let probs = logits.iter().map(|&z| sigmoid(z)).collect();
    Ok(RankedPrediction::from_keys(&logits, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextPipeline;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(names: &[&str]) -> LabelSet {
        LabelSet::from_names(&TextPipeline::default(), names).unwrap()
    }

    fn separable() -> Vec<(Vec<f64>, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..40)
            .map(|i| {
                let class = i % 2;
                let shift = if class == 0 { 1.5 } else { -1.5 };
                (
                    vec![shift + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0) - shift],
                    class,
                )
            })
            .collect()
    }

    #[test]
    fn separable_fixture_is_fit_exactly() {
        let ls = labels(&["Bonds", "Swap"]);
        let data = separable();
        let model = train_logreg(&data, &ls, LogRegParams::default()).unwrap();
        let correct = data
            .iter()
            .filter(|(x, y)| lr_rank(&model, x).unwrap().top() == *y)
            .count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn heavy_regularization_leaves_intercepts() {
        let ls = labels(&["Bonds", "Swap"]);
        let mut data = separable();
        data.truncate(30);
        data.push((vec![0.2, 0.1], 0));
        let params = LogRegParams {
            l2: 1e6,
            ..LogRegParams::default()
        };
        let model = train_logreg(&data, &ls, params).unwrap();
        for w in &model.weights {
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm < 1e-3, "{norm}");
        }
        // 16 of 31 examples are class 0.
        let p0 = sigmoid(model.intercepts[0]);
        assert!((p0 - 16.0 / 31.0).abs() < 1e-3, "{p0}");
        assert_eq!(lr_rank(&model, &[5.0, -5.0]).unwrap().top(), 0);
    }

    #[test]
    fn objective_decreases_monotonically() {
        let data = separable();
        let features: Vec<_> = data.iter().map(|(x, _)| x.clone()).collect();
        let targets: Vec<_> = data.iter().map(|(_, y)| *y == 0).collect();
        let obj = BinaryObjective {
            features: &features,
            targets: &targets,
            l2: 1.0,
        };
        let fit = obj.fit(200, 1e-10);
        assert!(fit.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.trace.last().unwrap() < &fit.trace[0]);
    }

    #[test]
    fn zero_model_scores_half() {
        let ls = labels(&["Bonds", "Swap", "Option"]);
        let model = LogisticRegressionModel {
            labels: ls,
            l2: 1.0,
            weights: vec![vec![0.0; 2]; 3],
            intercepts: vec![0.0; 3],
        };
        let r = lr_rank(&model, &[0.3, -0.7]).unwrap();
        assert_eq!(r.ranking, [0, 1, 2]);
        assert!(r.scores.iter().all(|&s| s == 0.5));
    }

    #[test]
    fn ranking_follows_logits_even_when_saturated() {
        let model = LogisticRegressionModel {
            labels: labels(&["Bonds", "Swap"]),
            l2: 1.0,
            weights: vec![vec![1.0], vec![2.0]],
            intercepts: vec![0.0, 0.0],
        };
        let r = lr_rank(&model, &[100.0]).unwrap();
        assert_eq!(r.ranking, [1, 0]);
        let r = lr_rank(&model, &[0.5]).unwrap();
        assert!(r.scores.iter().all(|&s| s > 0.0 && s < 1.0));
    }

    #[test]
    fn errors() {
        let ls = labels(&["Bonds", "Swap"]);
        let p = LogRegParams::default();
        assert!(matches!(train_logreg(&[], &ls, p), Err(Error::EmptyTrainingSet)));
        assert!(matches!(
            train_logreg(&[(vec![1.0], 0), (vec![2.0], 0)], &ls, p),
            Err(Error::SingleClass(_))
        ));
        assert!(matches!(
            train_logreg(&[(vec![1.0], 0), (vec![f64::INFINITY], 1)], &ls, p),
            Err(Error::NonFinite(1))
        ));
        let model = train_logreg(&[(vec![1.0], 0), (vec![-1.0], 1)], &ls, p).unwrap();
        assert!(lr_rank(&model, &[1.0, 2.0]).is_err());
    }
}
