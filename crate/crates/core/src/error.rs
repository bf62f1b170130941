use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input stream did not parse in the declared format.
    #[error("parse error: {0}")]
    Parse(String),
    /// A domain invariant was violated (non-positive eigenvalue, zero
    /// multiplicity, order violation, non-finite entry, ...).
    #[error("invariant violation: {0}")]
    Invariant(String),
    /// Sequences, spectra, or tensors do not agree on block structure.
    #[error("alignment error: {0}")]
    Alignment(String),
    /// A stored tensor block has an inconsistent shape.
    #[error("shape error: {0}")]
    Shape(String),
    /// Too few blocks (or nonzero blocks) for a meaningful fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// A black-box mapping failed the superposition probes.
    #[error("nonlinearity detected: {0}")]
    Nonlinearity(String),
    /// A requested truncation exceeds the available blocks.
    #[error("truncation error: {0}")]
    Truncation(String),
    /// The sampling grid is too small for the requested truncation.
    #[error("alias error: {0}")]
    Alias(String),
    /// Constant search exhausted the configured caps.
    #[error("search cap exceeded: {0}")]
    SearchCapExceeded(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
