use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("{what} outside its domain: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("basis dimension {required} exceeds the capacity limit {limit}")]
    Capacity { required: u128, limit: usize },
    #[error("singular point: {0}")]
    Singular(String),
    #[error("eigensolver did not converge after {iterations} iterations (residual norms {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },
    #[error("optimizer stagnated: {0}")]
    Stagnation(String),
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { what, detail: detail.into() }
}
