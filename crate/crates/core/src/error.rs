use thiserror::Error;

/// Errors produced by the decomposition, compilation and serialization layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("matrix is not unitary: unitarity residual max|M^dagger M - I| = {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
