use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown suite `{0}`; `distfix list` shows the available suites")]
    UnknownSuite(String),
    #[error("bad parameter `{key}`: {reason}")]
    BadParam { key: String, reason: String },
    #[error(transparent)]
    Core(#[from] distfix::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn bad(key: &str, reason: impl Into<String>) -> Self {
        CliError::BadParam {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
