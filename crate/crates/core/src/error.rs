use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are coarse on purpose: the CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A privacy precondition or planner constraint cannot be met.
    #[error("privacy budget error: {0}")]
    Budget(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    /// A ground-truth oracle failed to certify its answer.
    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("diagnostic error: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}

pub(crate) use ensure;
