//! Crate-wide error types.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A trial file that does not conform to the binary interchange format.
    #[error("{path}: {detail}")]
    TrialFormat { path: PathBuf, detail: String },

    /// A malformed manifest row (bad label, bad index, missing column).
    #[error("manifest {path}, record {record}: {detail}")]
    Manifest {
        path: PathBuf,
        record: usize,
        detail: String,
    },

    #[error("unknown channel {0:?}")]
    UnknownChannel(String),

    #[error("config line {line}: {detail}")]
    Config { line: usize, detail: String },

    /// Violated precondition on an operation's inputs.
    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Train(#[from] TrainError),

    #[error("{0}")]
    Eval(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::TrialFormat {
            path: path.into(),
            detail: detail.into(),
        }
    }
}

/// Failure while fitting a classifier.
///
/// Kept separate from [`Error`] so the Monte-Carlo loop can count
/// per-repetition training failures without aborting a whole cell.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrainError {
    #[error("training set does not contain both classes")]
    ClassAbsent,

    #[error("feature vectors are zero-dimensional")]
    ZeroDimensional,

    #[error("non-finite value in training data")]
    NonFinite,

    #[error("class {class} has {got} points, need at least {required}")]
    TooFewPerClass {
        class: u8,
        got: usize,
        required: usize,
    },

    #[error("covariance matrix is not positive definite after shrinkage")]
    Degenerate,

    #[error("dual solver did not converge within {passes} passes")]
    NoConvergence { passes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}
