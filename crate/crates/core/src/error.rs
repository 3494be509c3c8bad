use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("model precondition violated: {0}")]
    ModelPrecondition(String),

    #[error("iteration cap exceeded: {iterations} iterations, cap {cap} ({context})")]
    IterationCap {
        iterations: usize,
        cap: usize,
        context: String,
    },

    #[error("tree depth cap exceeded: depth {depth}, hard cap {cap}")]
    DepthCap { depth: usize, cap: usize },

    #[error("index holds no points")]
    EmptyIndex,

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
