use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state, mean or covariance became NaN or infinite.
    #[error("non-finite value in {context} at step {step}")]
    NonFinite { step: usize, context: String },

    #[error("observable `{observable}` is undefined at {point}")]
    Domain { observable: String, point: String },

    #[error("unsupported observable `{0}`: no closed-form monomial expansion")]
    UnsupportedObservable(String),

    #[error("embedding needs {requested} states, cap is {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("truncation policy rejected out-of-span term {term} in row {row}")]
    Truncation { row: usize, term: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
