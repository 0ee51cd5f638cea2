use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("size limit: {needed} subsets exceed the budget of {budget}")]
    SizeLimit { needed: u128, budget: u128 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("wrong constructor: {0}")]
    WrongConstructor(String),
    #[error("verification failed: {0}")]
    FailedVerification(String),
    #[error("exact arithmetic overflow")]
    Overflow,
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
