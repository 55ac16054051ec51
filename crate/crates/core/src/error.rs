//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by synthesis, calibration, solving, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Peak extraction could not produce the requested number of separated peaks.
    #[error("insufficient peaks: requested {requested}, found {found} after suppression")]
    InsufficientPeaks { requested: usize, found: usize },

    /// The signal/noise eigenvalue split is ambiguous (subspace methods only).
    #[error("degenerate signal subspace: relative eigenvalue gap {gap:.3e}")]
    DegenerateSubspace { gap: f64 },

    /// Basis normalization hit a near-zero reference-antenna entry.
    #[error("normalization failed at grid angle {angle_deg:.3} deg: reference entry magnitude {magnitude:.3e}")]
    NormalizationFailure { angle_deg: f64, magnitude: f64 },

    /// Non-finite values where finite data is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Experiment configuration is invalid or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Binary container violates the documented layout.
    #[error("container format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
