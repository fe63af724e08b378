use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("zero pivot at row {row} of tridiagonal system")]
    Singular { row: usize },
    #[error("not supported: {0}")]
    Capability(String),
    #[error("stepper misuse: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, Error>;
