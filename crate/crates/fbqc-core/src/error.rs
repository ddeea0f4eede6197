use thiserror::Error;

/// Errors surfaced by the library; CLI maps these to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("enumeration limit exceeded: {0}")]
    EnumerationLimit(String),

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),

    #[error("no crossing in bracket: {0}")]
    NoCrossing(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
