//! Run configuration: `key = value` files layered as
//! preset < config file < command-line overrides.
//!
//! Relative paths in a config file resolve against the file's directory;
//! relative paths given as overrides resolve against the working directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::classify::LogRegParams;
use crate::embedding::TrainConfig;
use crate::error::{Error, Result};
use crate::eval::{ClassifierSpec, EmbeddingSource, SystemConfig, TrainPolicy};

/// Shipped system presets, by name.
pub const PRESETS: [(&str, &str); 3] = [
    ("system1", include_str!("../configs/system1.conf")),
    ("system2", include_str!("../configs/system2.conf")),
    ("system3", include_str!("../configs/system3.conf")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

const KEYS: &[&str] = &[
    "name",
    "system",
    "corpus_dir",
    "train_file",
    "test_file",
    "labels_file",
    "stopwords_file",
    "embedding_file",
    "output_dir",
    "embedding",
    "dim",
    "window",
    "negatives",
    "epochs",
    "learning_rate",
    "min_count",
    "subset1_classifier",
    "subset2_classifier",
    "subset2_train",
    "nb_alpha",
    "lr_l2",
    "lr_max_iters",
    "lr_tol",
    "seed",
    "workers",
    "deterministic",
    "max_sentences",
];

const PATH_KEYS: &[&str] = &[
    "corpus_dir",
    "train_file",
    "test_file",
    "labels_file",
    "stopwords_file",
    "embedding_file",
    "output_dir",
];

#[derive(Debug, Clone)]
struct Setting {
    value: String,
    base: Option<PathBuf>,
    origin: String,
}

/// Parse `key = value` lines. `#` starts a comment.
pub fn parse_key_values(text: &str, origin: &Path) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(origin, idx + 1, format!("expected key = value, found {line:?}")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::parse(origin, idx + 1, format!("unknown key {key:?}")));
        }
        out.push((idx + 1, key.to_owned(), value.trim().to_owned()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus_dir: Option<PathBuf>,
    pub train_file: Option<PathBuf>,
    pub test_file: Option<PathBuf>,
    pub labels_file: Option<PathBuf>,
    pub stopwords_file: Option<PathBuf>,
    pub embedding_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub system: SystemConfig,
    pub seed: u64,
    pub workers: usize,
    pub deterministic: bool,
    pub max_sentences: usize,
}

#[derive(Debug, Default)]
pub struct ConfigBuilder {
    settings: BTreeMap<String, Setting>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn apply(&mut self, entries: Vec<(usize, String, String)>, base: Option<&Path>, origin: &str) {
        for (line, key, value) in entries {
            self.settings.insert(
                key,
                Setting {
                    value,
                    base: base.map(Path::to_path_buf),
                    origin: format!("{origin}:{line}"),
                },
            );
        }
    }

    pub fn preset(&mut self, name: &str) -> Result<&mut Self> {
        let text = preset(name).ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown system {name:?} (available: {})", names.join(", ")))
        })?;
        let origin = format!("preset {name}");
        let entries = parse_key_values(text, Path::new(&origin))?;
        self.apply(entries, None, &origin);
        Ok(self)
    }

    /// Layer a config file. A `system` key in the file pulls in that preset
    /// underneath the file's own settings.
    pub fn file(&mut self, path: &Path) -> Result<&mut Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let entries = parse_key_values(&text, path)?;
        if let Some((_, _, name)) = entries.iter().find(|(_, k, _)| k == "system") {
            self.preset(name)?;
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        self.apply(entries, Some(&base), &path.display().to_string());
        Ok(self)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<&mut Self> {
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        self.settings.insert(
            key.to_owned(),
            Setting {
                value: value.into(),
                base: None,
                origin: "command line".into(),
            },
        );
        Ok(self)
    }

    fn raw(&self, key: &str) -> Option<&Setting> {
        self.settings.get(key)
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .value
                .parse()
                .map_err(|_| Error::Config(format!("{}: invalid value {:?} for {key}", s.origin, s.value))),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        debug_assert!(PATH_KEYS.contains(&key));
        self.raw(key).map(|s| {
            let p = PathBuf::from(&s.value);
            match &s.base {
                Some(base) if p.is_relative() => base.join(p),
                _ => p,
            }
        })
    }

    fn parsed<T: std::str::FromStr<Err = Error>>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .value
                .parse()
                .map_err(|e: Error| Error::Config(format!("{}: {e}", s.origin))),
        }
    }

    pub fn build(&self) -> Result<RunConfig> {
        let defaults = TrainConfig::default();
        let seed: u64 = self.get("seed", 1)?;
        let workers: usize = self.get("workers", 1)?;
        if workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        let deterministic: bool = self.get("deterministic", workers == 1)?;
        let dim: usize = self.get("dim", defaults.dim)?;
        let embedding_file = self.path("embedding_file");

        let embedding = match self.get::<String>("embedding", "trained".into())?.as_str() {
            "trained" => {
                let train = TrainConfig {
                    dim,
                    window: self.get("window", defaults.window)?,
                    negatives: self.get("negatives", defaults.negatives)?,
                    epochs: self.get("epochs", defaults.epochs)?,
                    initial_learning_rate: self.get("learning_rate", defaults.initial_learning_rate)?,
                    min_count: self.get("min_count", defaults.min_count)?,
                    seed,
                    workers: if deterministic { 1 } else { workers },
                };
                train.validate()?;
                EmbeddingSource::Trained(train)
            }
            "external" => {
                let path = embedding_file
                    .clone()
                    .ok_or_else(|| Error::Config("external embeddings need embedding_file".into()))?;
                EmbeddingSource::External { path, dim }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown embedding source {other:?} (expected trained or external)"
                )))
            }
        };

        let logreg = LogRegParams {
            l2: self.get("lr_l2", LogRegParams::default().l2)?,
            max_iters: self.get("lr_max_iters", LogRegParams::default().max_iters)?,
            tol: self.get("lr_tol", LogRegParams::default().tol)?,
        };
        let system = SystemConfig {
            name: self.get("name", "custom".to_owned())?,
            embedding,
            subset1: self.parsed("subset1_classifier", "l2".parse()?)?,
            subset2: self.parsed("subset2_classifier", ClassifierSpec::NaiveBayes)?,
            subset2_train: self.parsed("subset2_train", TrainPolicy::Augmented)?,
            nb_alpha: self.get("nb_alpha", 1.0)?,
            logreg,
        };
        let max_sentences: usize = self.get("max_sentences", 5)?;
        if max_sentences == 0 {
            return Err(Error::Config("max_sentences must be positive".into()));
        }

        Ok(RunConfig {
            corpus_dir: self.path("corpus_dir"),
            train_file: self.path("train_file"),
            test_file: self.path("test_file"),
            labels_file: self.path("labels_file"),
            stopwords_file: self.path("stopwords_file"),
            embedding_file,
            output_dir: self.path("output_dir").unwrap_or_else(|| PathBuf::from("out")),
            system,
            seed,
            workers,
            deterministic,
            max_sentences,
        })
    }
}

impl RunConfig {
    /// The path stored under `key`, which must be set and exist.
    pub fn require(&self, key: &str, path: &Option<PathBuf>) -> Result<PathBuf> {
        let p = path
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{key} is not set")))?;
        if !p.exists() {
            return Err(Error::Config(format!("{key} {} does not exist", p.display())));
        }
        Ok(p.clone())
    }
}
