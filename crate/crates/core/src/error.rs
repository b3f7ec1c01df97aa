use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent problem definition.
    #[error("validation error: {0}")]
    Validation(String),
    /// Resolution or truncation settings below the supported floor.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("index out of bounds: {0}")]
    Bounds(String),
    /// Iterative method failed; carries the best residual reached.
    #[error("numeric failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },
    /// Quadrature or grid too coarse for a trustworthy result.
    #[error("accuracy error: {0}")]
    Accuracy(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            residual,
        }
    }
}
