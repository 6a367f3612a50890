use thiserror::Error;

pub type Result<T> = std::result::Result<T, NqsError>;

#[derive(Debug, Error)]
pub enum NqsError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} is {value}, limit {limit}")]
    Capacity {
        what: String,
        value: usize,
        limit: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("zero amplitude at configuration {0}")]
    ZeroAmplitude(String),

    #[error("convention mismatch: state uses {expected:?}, configuration uses {got:?}")]
    ConventionMismatch {
        expected: crate::spin::Convention,
        got: crate::spin::Convention,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("divergence infinite in basis {basis}: model probability vanishes where data is positive")]
    DivergenceInfinite { basis: String },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
