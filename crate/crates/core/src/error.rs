use thiserror::Error;

/// Errors raised by algebra, barrier, decomposition and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands live in different algebras or have the wrong length.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// The point is outside the domain of the operation (e.g. not interior).
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent user input.
    #[error("invalid input: {0}")]
    Input(String),
    /// A numerical routine failed to converge or hit a degenerate system.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
