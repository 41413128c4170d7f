//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("invalid CSR structure: {0}")]
    Csr(String),

    #[error("parse error in {path} line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("index out of range: {0}")]
    Range(String),

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("invalid config field `{field}`: {msg}")]
    Config { field: &'static str, msg: String },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("non-finite value in layer {layer}: {what}")]
    Numeric { layer: usize, what: String },

    #[error("training diverged (loss not finite) at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("weight transfer rejected: {}", mismatches.join("; "))]
    Transfer { mismatches: Vec<String> },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("mask selects no rows")]
    EmptyMask,

    #[error("bad parameter file: {0}")]
    ParamFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Config {
            field,
            msg: msg.into(),
        }
    }
}
