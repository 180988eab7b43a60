use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by star operations, reachability and the verification driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid interval at coordinate {index}: lower {lower} > upper {upper}")]
    InvertedBounds { index: usize, lower: f64, upper: f64 },

    #[error("star predicate is infeasible (empty set)")]
    EmptyStar,

    #[error("linear program is unbounded; the predicate is missing variable bounds")]
    Unbounded,

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("operands do not share a predicate: {0}")]
    PredicateMismatch(String),

    #[error("exact ReLU splitting exceeded the budget of {budget} stars")]
    SplitBudget { budget: usize },

    #[error("unsupported reachability mode: {0}")]
    UnsupportedMode(String),

    #[error("layer {layer}: {message}")]
    Layer { layer: usize, message: String },

    #[error("invalid perturbation: {0}")]
    Perturbation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn layer(layer: usize, msg: impl Into<String>) -> Self {
        Error::Layer {
            layer,
            message: msg.into(),
        }
    }
}
