//! Error type shared across the crate.
//!
//! Variants are grouped by how the CLI must report them: parameter and
//! configuration problems are validation failures (exit code 2), grid/memory
//! caps are resource failures (exit code 3), and irreparable factorizations
//! are numerical failures (exit code 4).

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain (bad `q`, negative
    /// `beta2`, index out of range, precondition violations, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configuration file failed to parse or validate.
    #[error("configuration error: {0}")]
    Config(String),

    /// A requested computation exceeds a configured resource cap.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A numerical step failed irreparably (covariance not positive definite
    /// at the jitter cap, degenerate fit, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Filesystem trouble while reading configs or writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => 2,
            Error::ResourceLimit(_) => 3,
            Error::Numerical(_) => 4,
            Error::Io(_) => 2,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
