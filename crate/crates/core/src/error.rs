use thiserror::Error;

/// Errors raised by the library. Each variant names the contract that failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid distortion matrix: {0}")]
    InvalidDistortion(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("p({index}) = {p} > 0 but q({index}) = 0")]
    AbsoluteContinuityViolation { index: usize, p: f64 },

    #[error("curve needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("curve abscissae must be strictly increasing (index {0})")]
    NonIncreasingGrid(usize),

    #[error("tolerance {0} outside (0, 1e-2]")]
    BadTolerance(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("grid oracle too large: {points} evaluations exceed budget {budget}")]
    TooLarge { points: u128, budget: u128 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("distortion measure violates the triangle inequality at ({0}, {1}, {2})")]
    TriangleViolation(usize, usize, usize),

    #[error("sequence length {got} does not match blocklength {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
