/// Errors produced by the crossing-probability engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("unsupported size {n} (maximum {max})")]
    UnsupportedSize { n: usize, max: usize },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("time budget exceeded")]
    DeadlineExceeded,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
