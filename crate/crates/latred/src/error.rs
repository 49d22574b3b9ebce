//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field error: {0}")]
    Field(String),

    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("unknown symbol {symbol:?} for signature {sig}")]
    UnknownSymbol { symbol: String, sig: String },

    #[error("signature error: {0}")]
    Signature(String),

    #[error("unbound variable {0:?}")]
    Unbound(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("frame error: {0}")]
    Frame(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
