use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RopError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("recovery condition violated: {0}")]
    ConditionViolated(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for RopError {
    fn from(e: std::io::Error) -> Self {
        RopError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RopError>;

pub(crate) fn dim_err(expected: impl Into<String>, found: impl Into<String>) -> RopError {
    RopError::Dimension {
        expected: expected.into(),
        found: found.into(),
    }
}
