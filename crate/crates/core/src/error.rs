use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {what} at ({row}, {col})")]
    NonFiniteEntry {
        what: &'static str,
        row: usize,
        col: usize,
    },
    #[error("group index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hyperparameter of group {group} is zero")]
    DegenerateGamma { group: usize },
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),
    #[error("chain is empty or too short: {0}")]
    EmptyChain(String),
    #[error("invalid block specification: {0}")]
    InvalidBlockSpec(String),
    #[error("invalid waveform shape: {0}")]
    InvalidWaveformShape(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
