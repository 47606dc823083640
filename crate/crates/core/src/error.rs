use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// Each variant maps onto one of the stable process exit codes through
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty vocabulary: no token reaches min_count {min_count}")]
    EmptyVocabulary { min_count: usize },

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("training data contains a single class ({0}); need at least two")]
    SingleClass(String),

    #[error("non-finite feature value in example {0}")]
    NonFinite(usize),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("gold label {0:?} missing from ranking")]
    MissingGold(String),

    #[error("no scored predictions")]
    NoPredictions,

    #[error("{0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// 0 success, 1 internal, 2 config/input, 3 data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Config(_)
            | Error::DimensionMismatch { .. }
            | Error::UnknownLabel(_) => 2,
            Error::EmptyVocabulary { .. }
            | Error::EmptyCorpus(_)
            | Error::EmptyTrainingSet
            | Error::SingleClass(_)
            | Error::NonFinite(_)
            | Error::MissingGold(_)
            | Error::NoPredictions => 3,
            Error::Internal(_) => 1,
        }
    }
}
