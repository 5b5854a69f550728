use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at record {record}: {message}")]
    Parse { record: usize, message: String },

    #[error("label mismatch at record {record}: stored {stored}, sbp/dbp imply {implied}")]
    LabelConsistency { record: usize, stored: u8, implied: u8 },

    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("signal too short: length {len}, need at least {required}")]
    SignalTooShort { len: usize, required: usize },

    #[error("infeasible feature quota: {0}")]
    InfeasibleQuota(String),

    #[error("bias fitting failed: {0}")]
    Fit(String),

    #[error("record {index}: {source}")]
    Record {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("need at least 2 peaks, found {found}")]
    InsufficientPeaks { found: usize },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn at_record(self, index: usize) -> Self {
        Error::Record { index, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
