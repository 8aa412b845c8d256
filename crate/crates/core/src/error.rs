use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("reference point {reference:?} is not strictly dominated by {point:?}")]
    ReferenceNotDominated { reference: Vec<f64>, point: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cholesky factorization failed after jitter {jitter:e} (condition number {condition:e})")]
    Cholesky { jitter: f64, condition: f64 },

    #[error("evaluator failed at weights {weights:?}: {message}")]
    Evaluator { weights: Vec<f64>, message: String },

    #[error("training diverged: {0}")]
    Training(String),

    #[error("config: {0}")]
    Config(String),

    #[error("archive {path}: line {line}: {message}")]
    Archive { path: PathBuf, line: usize, message: String },

    #[error("archive is locked by {0}")]
    Locked(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
