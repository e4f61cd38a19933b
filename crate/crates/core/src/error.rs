use thiserror::Error;

/// Errors raised by the joint-measurability toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input failed a structural check (Hermiticity, finiteness, shape).
    #[error("validation failed: {0}")]
    Validation(String),

    /// Input is well-formed but outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    /// An iterative routine hit its iteration cap.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
