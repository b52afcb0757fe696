use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("estimate count {got} does not match neighborhood size {expected}")]
    MissingEstimate { expected: usize, got: usize },
    #[error("variable index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: i64, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("representation is not monotone")]
    NotMonotone,
    #[error("conjunction length {len} exceeds limit {max}")]
    TooLong { len: usize, max: usize },
    #[error("drift schedule infeasible: {0}")]
    DriftInfeasible(String),
    #[error("drift step {step} has error {err:e}, exceeding {delta:e}")]
    DriftViolation { step: usize, err: f64, delta: f64 },
    #[error("invalid CSQ algorithm: {0}")]
    InvalidAlgorithm(String),
    #[error("parse error: {0}")]
    Parse(String),
}
