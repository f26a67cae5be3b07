use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: bad usage or invalid input.
pub const EXIT_USAGE: i32 = 1;
/// Exit status: the request exceeds backend capacity.
pub const EXIT_CAPACITY: i32 = 2;
/// Exit status: every row of a sweep failed.
pub const EXIT_SWEEP_FAILED: i32 = 3;
/// Exit status: a verification check or cache recheck failed.
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Library(#[from] permball::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no sweep row produced a value ({0} rows)")]
    SweepFailed(usize),

    #[error("{0}")]
    Verification(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(permball::Error::Capacity(_)) => EXIT_CAPACITY,
            CliError::Library(permball::Error::Consistency(_)) => EXIT_VERIFY,
            CliError::SweepFailed(_) => EXIT_SWEEP_FAILED,
            CliError::Verification(_) => EXIT_VERIFY,
            _ => EXIT_USAGE,
        }
    }

    /// Extra advice printed after the error message, if any.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Library(permball::Error::Capacity(_)) => Some(
                "hint: pass --expert to raise the backend limits (slow), \
                 or use `permball sweep` for lower/upper bounds instead of exact counts",
            ),
            CliError::Library(permball::Error::Validation(_)) => {
                Some("hint: r must satisfy 0 <= r <= n-1, and rho*(n-1) must be an integer")
            }
            _ => None,
        }
    }
}
