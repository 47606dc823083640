//! Self-describing text files for trained classifiers.
//!
//! ```text
//! hypernym-model 1
//! kind bernoulli_nb            (or logistic_ovr)
//! dim <d>
//! labels <k>
//! label <id><TAB><normalized tokens>      (k lines, label order)
//! alpha <a>  threshold <t>                (naive Bayes)
//! prior <c> <log prior>                   (naive Bayes, k lines)
//! log_p1 <c> <d values>                   (naive Bayes, k lines)
//! log_p0 <c> <d values>                   (naive Bayes, k lines)
//! l2 <l>                                  (logistic regression)
//! class <c> <intercept> <d weights>       (logistic regression, k lines)
//! ```
//!
//! Numbers follow the embedding file conventions.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::labels::{Label, LabelSet};
use super::logreg::{lr_rank, LogisticRegressionModel};
use super::naive_bayes::{nb_rank, NaiveBayesModel};
use super::rank::RankedPrediction;
use crate::error::{Error, Result};

const MAGIC: &str = "hypernym-model 1";

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    NaiveBayes(NaiveBayesModel),
    LogisticRegression(LogisticRegressionModel),
}

impl From<NaiveBayesModel> for ClassifierModel {
    fn from(m: NaiveBayesModel) -> Self {
        ClassifierModel::NaiveBayes(m)
    }
}

impl From<LogisticRegressionModel> for ClassifierModel {
    fn from(m: LogisticRegressionModel) -> Self {
        ClassifierModel::LogisticRegression(m)
    }
}

fn write_values<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        write!(w, " {v}")?;
    }
    writeln!(w)
}

impl ClassifierModel {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierModel::NaiveBayes(_) => "bernoulli_nb",
            ClassifierModel::LogisticRegression(_) => "logistic_ovr",
        }
    }

    pub fn labels(&self) -> &LabelSet {
        match self {
            ClassifierModel::NaiveBayes(m) => &m.labels,
            ClassifierModel::LogisticRegression(m) => &m.labels,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClassifierModel::NaiveBayes(m) => m.dim(),
            ClassifierModel::LogisticRegression(m) => m.dim(),
        }
    }

    pub fn rank(&self, x: &[f64]) -> Result<RankedPrediction> {
        match self {
            ClassifierModel::NaiveBayes(m) => nb_rank(m, x),
            ClassifierModel::LogisticRegression(m) => lr_rank(m, x),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "kind {}", self.kind())?;
        writeln!(w, "dim {}", self.dim())?;
        let labels = self.labels();
        writeln!(w, "labels {}", labels.len())?;
        for label in labels.iter() {
            writeln!(w, "label {}\t{}", label.id, label.tokens.join(" "))?;
        }
        match self {
            ClassifierModel::NaiveBayes(m) => {
                writeln!(w, "alpha {}", m.alpha)?;
                writeln!(w, "threshold {}", m.threshold)?;
                for (c, p) in m.class_log_prior.iter().enumerate() {
                    writeln!(w, "prior {c} {p}")?;
                }
                for (c, row) in m.log_p1.iter().enumerate() {
                    write!(w, "log_p1 {c}")?;
                    write_values(&mut w, row)?;
                }
                for (c, row) in m.log_p0.iter().enumerate() {
                    write!(w, "log_p0 {c}")?;
                    write_values(&mut w, row)?;
                }
            }
            ClassifierModel::LogisticRegression(m) => {
                writeln!(w, "l2 {}", m.l2)?;
                for (c, (b, ws)) in m.intercepts.iter().zip(&m.weights).enumerate() {
                    write!(w, "class {c} {b}")?;
                    write_values(&mut w, ws)?;
                }
            }
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut reader = Reader {
            lines: text.lines().enumerate(),
            origin,
            line: 0,
        };
        let magic = reader.next_line()?;
        if magic.trim() != MAGIC {
            return Err(reader.error(format!("expected {MAGIC:?}")));
        }
        let kind = reader.keyed("kind")?.trim().to_owned();
        if !matches!(kind.as_str(), "bernoulli_nb" | "logistic_ovr") {
            return Err(reader.error(format!("unknown model kind {kind:?}")));
        }
        let dim: usize = reader.number("dim")?;
        let k: usize = reader.number("labels")?;
        let mut labels = Vec::with_capacity(k);
        for _ in 0..k {
            let rest = reader.keyed("label")?;
            let (id, tokens) = rest
                .split_once('\t')
                .ok_or_else(|| reader.error("label line needs <id><TAB><tokens>"))?;
            labels.push(Label {
                id: id.to_owned(),
                tokens: tokens.split_whitespace().map(str::to_owned).collect(),
            });
        }
        let labels = LabelSet::new(labels).map_err(|e| reader.error(e.to_string()))?;

        let model = match kind.as_str() {
            "bernoulli_nb" => {
                let alpha = reader.number("alpha")?;
                let threshold = reader.number("threshold")?;
                let mut class_log_prior = Vec::with_capacity(k);
                for c in 0..k {
                    class_log_prior.push(reader.class_row("prior", c, 1)?[0]);
                }
                let mut log_p1 = Vec::with_capacity(k);
                for c in 0..k {
                    log_p1.push(reader.class_row("log_p1", c, dim)?);
                }
                let mut log_p0 = Vec::with_capacity(k);
                for c in 0..k {
                    log_p0.push(reader.class_row("log_p0", c, dim)?);
                }
                ClassifierModel::NaiveBayes(NaiveBayesModel {
                    labels,
                    alpha,
                    threshold,
                    class_log_prior,
                    log_p1,
                    log_p0,
                })
            }
            "logistic_ovr" => {
                let l2 = reader.number("l2")?;
                let mut weights = Vec::with_capacity(k);
                let mut intercepts = Vec::with_capacity(k);
                for c in 0..k {
                    let mut row = reader.class_row("class", c, dim + 1)?;
                    intercepts.push(row.remove(0));
                    weights.push(row);
                }
                ClassifierModel::LogisticRegression(LogisticRegressionModel {
                    labels,
                    l2,
                    weights,
                    intercepts,
                })
            }
            other => return Err(reader.error(format!("unknown model kind {other:?}"))),
        };
        if let Some((idx, extra)) = reader.lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(
                origin,
                idx + 1,
                format!("unexpected trailing line {extra:?}"),
            ));
        }
        Ok(model)
    }
}

struct Reader<'a, I> {
    lines: I,
    origin: &'a Path,
    line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Reader<'a, I> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::parse(self.origin, self.line, message)
    }

    fn next_line(&mut self) -> Result<&'a str> {
        for (idx, line) in self.lines.by_ref() {
            self.line = idx + 1;
            if !line.trim().is_empty() {
                return Ok(line);
            }
        }
        self.line += 1;
        Err(self.error("unexpected end of file"))
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ => Err(self.error(format!("expected {key:?} line"))),
        }
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let rest = self.keyed(key)?;
        rest.trim()
            .parse()
            .map_err(|_| self.error(format!("invalid {key} value {rest:?}")))
    }

    fn class_row(&mut self, key: &str, class: usize, width: usize) -> Result<Vec<f64>> {
        let rest = self.keyed(key)?;
        let mut fields = rest.split_whitespace();
        if fields.next().and_then(|f| f.parse::<usize>().ok()) != Some(class) {
            return Err(self.error(format!("expected {key} row for class {class}")));
        }
        let values = fields
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.error("invalid number"))?;
        if values.len() != width {
            return Err(self.error(format!("expected {width} values, found {}", values.len())));
        }
        Ok(values)
    }
}
