use thiserror::Error;

pub type Result<T> = std::result::Result<T, ChaosError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} requires {requested} but the configured cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("horizon mismatch: expected {expected}, found {found}")]
    Horizon { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl ChaosError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ChaosError::Domain(msg.into())
    }
}
