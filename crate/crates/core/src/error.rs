use thiserror::Error;

/// Errors raised while constructing or analysing a tiling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {got}: {reason}")]
    InvalidDimension { got: usize, reason: &'static str },

    #[error("parameter p_{index} = {value} is not strictly positive")]
    InvalidParameter { index: usize, value: f64 },

    #[error("scale factor {0} is not strictly positive")]
    InvalidScale(f64),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid permutation for level {level}: {reason}")]
    InvalidPermutation { level: usize, reason: String },

    #[error("base mesh cannot be lifted: {0}")]
    InvalidBase(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integer overflow while computing a lattice determinant")]
    Overflow,

    #[error("degenerate simplex (zero lattice determinant)")]
    Degenerate,

    #[error("{count} cells exceed the budget of {budget}")]
    Budget { count: usize, budget: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
