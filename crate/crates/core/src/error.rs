use thiserror::Error;

/// Errors raised by the attention library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SfaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, SfaError>;

macro_rules! invalid_arg {
    ($($t:tt)*) => {
        $crate::error::SfaError::InvalidArgument(format!($($t)*))
    };
}
pub(crate) use invalid_arg;
