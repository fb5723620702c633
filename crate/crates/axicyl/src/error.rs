//! Error taxonomy shared by the library and the command-line front end.
//!
//! The process exit code is derived from the error class: configuration and
//! parameter problems exit with 2, numerical failures with 3, and anything
//! wrong with files or serialized artifacts with 4.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent run configuration (bad key, missing key,
    /// violated admissibility relation between exponents, ...).
    #[error("config error: {0}")]
    Config(String),

    /// A single argument of an operation is outside its documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A structural precondition was violated (grid mismatch, wrong parity,
    /// a field that must vanish on a boundary does not, time regression, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A non-finite sample was found where a finite one is required.
    #[error("evaluation error: non-finite value {value} at node (i={i}, j={j}) of '{label}'")]
    NonFinite {
        label: String,
        i: usize,
        j: usize,
        value: f64,
    },

    /// The elliptic solve or the time integration failed.
    #[error("solver error: {0}")]
    Solver(String),

    /// A serialized artifact (checkpoint, CSV, JSON) is malformed.
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 solver, 4 format/io.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::Contract(_) => 2,
            Error::NonFinite { .. } | Error::Solver(_) => 3,
            Error::Format(_) | Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
