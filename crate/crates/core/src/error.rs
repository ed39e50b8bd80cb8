use std::path::PathBuf;

use thiserror::Error;

use crate::multiindex::MultiIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("multi-index length mismatch: expected {expected}, got {found}")]
    IndexLength { expected: usize, found: usize },

    #[error("index set is not downward closed: {0} is missing a backward neighbour")]
    NotDownwardClosed(MultiIndex),

    #[error("invalid multi-index {0}: components must be >= 1")]
    InvalidIndex(MultiIndex),

    #[error("point {point:?} lies outside the parameter domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("invalid parameter domain: {0}")]
    InvalidDomain(String),

    #[error("grid with {requested} points exceeds the configured cap of {cap}")]
    GridTooLarge { requested: u128, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fidelity {alpha} is not available (model caps: {caps:?})")]
    FidelityUnavailable { alpha: MultiIndex, caps: Vec<u32> },

    #[error("model evaluation failed at fidelity {alpha}, y = {y:?}: {reason}")]
    Evaluation {
        alpha: MultiIndex,
        y: Vec<f64>,
        reason: String,
    },

    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },

    #[error("schema mismatch in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
