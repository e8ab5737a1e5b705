use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input entry {value} at position {index} is not a sign (±1)")]
    NotASign { index: usize, value: f64 },

    #[error("truth table length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dense form requires n <= {cap}, got n = {n}")]
    DenseCap { n: usize, cap: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("extension requires N > n (n = {n}, N = {big_n})")]
    ExtensionSize { n: usize, big_n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("order {order} exceeds cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("exact mode requires n <= {cap}, got n = {n}")]
    ExactCap { n: usize, cap: usize },

    #[error("missing per-degree INAL for degree {0}")]
    MissingDegree(usize),

    #[error("activation is not expressive up to order {order}: {detail}")]
    NotExpressive { order: usize, detail: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite loss at step {step}: {value}")]
    NonFiniteLoss { step: usize, value: f64 },

    #[error("parse error in `{input}`: {msg}")]
    Parse { input: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(input: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            input: input.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
