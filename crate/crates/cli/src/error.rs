use std::path::PathBuf;

use otto_core::OttoError;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error("scheme {scheme} takes {expected} pointer widths, got {got}")]
    WidthCount {
        scheme: String,
        expected: usize,
        got: usize,
    },
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Model(OttoError),
}

impl From<OttoError> for CliError {
    fn from(e: OttoError) -> Self {
        match e {
            OttoError::UnknownScheme(name) => CliError::UnknownScheme(name),
            OttoError::WidthCount {
                scheme,
                expected,
                got,
            } => CliError::WidthCount {
                scheme,
                expected,
                got,
            },
            other => CliError::Model(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::UnknownScheme(_) => 3,
            CliError::WidthCount { .. } => 4,
            CliError::Io { .. } => 5,
            CliError::Model(_) => 6,
        }
    }
}
