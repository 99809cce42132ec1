//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: rejected record: {reason}")]
    RejectedRecord { line: usize, reason: String },

    #[error("empty record set: cannot build a network")]
    EmptyNetwork,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dense realization refused: N={n} exceeds cap {cap}")]
    DenseCap { n: usize, cap: usize },

    #[error("subspace block {index} has size {size}, above the dense cap {cap}")]
    BlockTooLarge { index: usize, size: usize, cap: usize },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NonConverged { iterations: usize, residual: f64 },

    #[error("QR iteration failed to converge; unconverged eigenvalue indices {indices:?}")]
    QrNonConvergence { indices: Vec<usize> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("all nodes removed by the income filter")]
    EmptyPopulation,

    #[error("decomposition inconsistent with matrix: {0}")]
    InconsistentDecomposition(String),

    #[error("initial vector has zero norm")]
    ZeroVector,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
