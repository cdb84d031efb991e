//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad block sizes, malformed group spec, bad flag values).
    #[error("configuration error: {0}")]
    Config(String),

    /// A hard resource cap was exceeded (group order, diagnostics dimension).
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Matrix dimensions do not match the operation's requirements.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Numerical failure (Cholesky breakdown, singular system, lost invariance).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A supplied object failed validation against its contract.
    #[error("validation error: {0}")]
    Validation(String),

    /// The iterative solver did not reach the requested tolerance.
    #[error("solver did not converge after {iterations} iterations (kkt residual {kkt_residual:.3e})")]
    NonConvergence { iterations: usize, kkt_residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed input file contents.
    #[error("parse error: {0}")]
    Parse(String),
}
