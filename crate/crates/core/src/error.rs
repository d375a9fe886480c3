use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value (precision, order, list) is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Gamma evaluated at a non-positive integer.
    #[error("gamma pole at {0}")]
    Pole(String),

    /// Index outside the valid triangle or range.
    #[error("index error: {0}")]
    Index(String),

    /// A recurrence hit an exactly vanishing denominator; use the explicit form.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A decimal string could not be parsed losslessly.
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },

    /// A persisted matrix file is malformed.
    #[error("malformed matrix file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    /// A numerical oracle did not reach its tolerance.
    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
