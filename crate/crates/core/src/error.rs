use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("grid under-resolves the frame: {0}")]
    UnderResolved(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
