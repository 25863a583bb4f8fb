use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("linearization invalid: {0}")]
    Linearization(String),

    #[error("shot-noise reference undefined: {0}")]
    UndefinedBound(String),

    #[error("Fock truncation: {0}")]
    Truncation(String),

    #[error("target unreachable: {0}")]
    Infeasible(String),

    #[error("electronic-noise correction impossible: {0}")]
    CorrectionImpossible(String),

    #[error("unphysical input: {0}")]
    Unphysical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate trace: {0}")]
    Trace(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code: 1 for usage/config/I-O problems, 2 for physics or
    /// domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigParse { .. } | Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
