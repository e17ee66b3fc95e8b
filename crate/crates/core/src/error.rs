use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("capacity exceeded: need {needed}, limit {limit}")]
    Capacity { needed: u64, limit: u64 },
    #[error("infeasible code: {0}")]
    InfeasibleCode(String),
    #[error("numerical integrity violated: {0}")]
    NumericalIntegrity(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("promise violation: {0}")]
    PromiseViolation(String),
    #[error("inconsistent result: {0}")]
    Inconsistency(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
