use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("non-finite value in {row}")]
    NonFinite { row: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Model(#[from] dtuq::Error),
}

impl CliError {
    /// 0 success, 1 I/O or internal failure, 2 usage, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::NonFinite { .. } => 3,
            CliError::Io { .. } => 1,
            CliError::Model(e) => match e {
                dtuq::Error::NonFinite(_) => 3,
                dtuq::Error::InvalidParameter(_)
                | dtuq::Error::OutOfSupport(_)
                | dtuq::Error::IncompatibleSupport(_)
                | dtuq::Error::DuplicateInput(_)
                | dtuq::Error::Unsupported(_)
                | dtuq::Error::DegenerateWeight(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
