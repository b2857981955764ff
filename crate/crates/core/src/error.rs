use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("power iteration stalled after {iters} iterations (best bound so far: {best})")]
    PowerIterationStalled { iters: usize, best: f64 },

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("inner iteration cap exceeded: {0}")]
    InnerCapExceeded(String),

    #[error("penalty continuation stalled: {0}")]
    ContinuationStalled(String),

    #[error("enumeration refused: n = {n} exceeds cap {cap}")]
    EnumerationTooLarge { n: usize, cap: usize },

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
