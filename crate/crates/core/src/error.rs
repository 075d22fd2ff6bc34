use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e}, allowed {allowed:.3e})")]
    NonHermitianInput { asymmetry: f64, allowed: f64 },

    #[error("operator is singular: eigenvalue {eigenvalue:.3e} is not above floor {floor:.3e}")]
    SingularOperator { eigenvalue: f64, floor: f64 },

    #[error("operator is indefinite: eigenvalue {eigenvalue:.3e}")]
    IndefiniteOperator { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state has no amplitude above the zero threshold")]
    ZeroVector,

    #[error("Bloch vector has length {length}, expected 1 for a pure state")]
    NonUnitBloch { length: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("subspace indices must differ (both are {0})")]
    IndicesEqual(usize),

    #[error("throw-away element is not positive: min eigenvalue {min_eigenvalue:.3e}")]
    ThrowawayNotPositive { min_eigenvalue: f64 },

    #[error("frame operator is singular (min eigenvalue {min_eigenvalue:.3e}); element set is not informationally complete")]
    SingularFrame { min_eigenvalue: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid outcome distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}
