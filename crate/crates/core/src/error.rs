use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count {n} outside supported range {min}..={max}")]
    QubitCount { n: usize, min: usize, max: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },

    #[error("control and target must differ (both {0})")]
    SameQubit(usize),

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigenvalue {0:e} is below the clipping floor")]
    NegativeEigenvalue(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient trials: need at least {required}, got {got}")]
    InsufficientTrials { required: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
