//! Crate error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or configuration value.
    #[error("invalid parameter: {0}")]
    Invalid(String),

    /// Mismatched dimensions between operands.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Numerical failure (singular matrix, nonconvergent factorization, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Optimization problem has no feasible point.
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    /// I/O or serialization failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
