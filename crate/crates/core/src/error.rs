use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no assignment for generator {0}")]
    MissingAssignment(String),
    #[error("degree mismatch for {gen}: expected {expected}, got {got}")]
    DegreeMismatch { gen: String, expected: i64, got: String },
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
