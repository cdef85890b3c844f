//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by model construction, enumeration, and the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability vector failed validation.
    #[error("invalid distribution in {context}: {reason}")]
    InvalidDistribution { context: String, reason: String },

    /// Two objects that must share dimensions do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A ground metric violated a pseudometric axiom.
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    /// Unknown or malformed benchmark specification.
    #[error("invalid benchmark spec `{spec}`: {reason}")]
    InvalidBenchmark { spec: String, reason: String },

    /// A configuration value is outside its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A requested enumeration or cache exceeds the configured size guard.
    #[error("size guard: {what} requires {requested} entries, cap is {cap}; {hint}")]
    SizeGuard { what: String, requested: u128, cap: u128, hint: String },

    /// Layered plan segments are not chained consistently.
    #[error("chain mismatch: {0}")]
    ChainMismatch(String),

    /// A transport problem had inconsistent marginals.
    #[error("invalid marginals: {0}")]
    InvalidMarginals(String),

    /// Perturbation could not renormalize a row.
    #[error("infeasible perturbation: {0}")]
    InfeasiblePerturbation(String),

    /// Artifact parsing or schema problems.
    #[error("artifact error: {0}")]
    Artifact(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// CSV (de)serialization failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
