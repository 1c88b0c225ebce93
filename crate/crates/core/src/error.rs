//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible shapes (e.g. differing observation counts).
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The metric is undefined on this input (zero denominator). This is an
    /// error, not a silent 0 or NaN; pairwise assembly converts it per cell.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Data violates a structural invariant (non-finite entries, zero extent).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// An operation produced no rows.
    #[error("empty result: {0}")]
    EmptyResult(String),

    /// Invalid configuration (recipe bounds, bad arguments).
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file contents (bad magic, truncation, non-finite payload).
    #[error("format error: {0}")]
    Format(String),

    /// Malformed or inconsistent manifest / activation set.
    #[error("manifest error: {0}")]
    Manifest(String),
}
