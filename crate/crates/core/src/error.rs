use thiserror::Error;

/// Errors raised by the simulation and application modules.
#[derive(Debug, Error)]
pub enum GbsError {
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A numerical routine produced a result outside its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A requested configuration is outside what the routine supports.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// No parameter exists that satisfies the requested target.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// An enumeration or exact computation would exceed its size guard.
    #[error("resource guard exceeded: {0}")]
    Resource(String),

    /// Malformed file content.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GbsError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        GbsError::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        GbsError::Numerical(msg.into())
    }
}

impl From<serde_json::Error> for GbsError {
    fn from(e: serde_json::Error) -> Self {
        GbsError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GbsError>;
