//! Error type shared by all modules.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed configuration input (bad line syntax, unparsable number).
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Key not part of the config schema.
    #[error("unknown config key at line {line}: `{key}`")]
    UnknownKey { line: usize, key: String },

    /// Parameter set violates a physical invariant.
    #[error("invalid parameters: {0}")]
    Validation(String),

    /// Input outside the model's domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested a steady-state quantity of an unstable system.
    #[error("system is optomechanically unstable (margin {margin:+.3e} 1/fs)")]
    Instability { margin: f64 },

    /// State or matrix fails a physicality requirement.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Fock truncation too small for the reached occupations.
    #[error("Fock truncation overflow: top-level population {population:.3e} exceeds 1e-3; increase cutoffs")]
    Truncation { population: f64 },

    /// An iterative numerical routine failed to converge.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    /// I/O failure while reading configuration.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
