use thiserror::Error;

/// Errors raised by validation and by the numerical operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max deviation {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is not one: got {trace}")]
    TraceNotOne { trace: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights are not normalized: sum {sum}")]
    NotNormalized { sum: f64 },

    #[error("invalid alpha {0}: must be finite, positive and different from 1")]
    InvalidAlpha(f64),

    #[error("effects do not sum to the identity: residual {residual:e}")]
    NotAPovm { residual: f64 },

    #[error("coarse-graining has no effects")]
    EmptyCoarseGraining,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("not a refinement: {reason} (residual {residual:e})")]
    NotARefinement { residual: f64, reason: String },

    #[error("coarse-graining is not projective (idempotency residual {residual:e})")]
    NonProjectiveCoarseGraining { residual: f64 },

    #[error("energy {energy} is not strictly inside the spectrum [{min}, {max}]")]
    EnergyOutOfRange { energy: f64, min: f64, max: f64 },

    #[error("root search did not converge: energy mismatch {mismatch:e}")]
    NoConvergence { mismatch: f64 },

    #[error("invalid temperature {0}")]
    InvalidTemperature(f64),

    #[error("invalid energy window width {0}")]
    InvalidWindow(f64),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid sample times: {0}")]
    InvalidSampleTimes(String),

    #[error("invalid level system: {0}")]
    InvalidLevels(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
