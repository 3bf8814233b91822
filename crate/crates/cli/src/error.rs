use std::path::PathBuf;

use bergman_core::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{stage}: {source}")]
    Pipeline {
        stage: String,
        #[source]
        source: LabError,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Pipeline { .. } | CliError::Io { .. } => 3,
        }
    }
}

pub(crate) trait Stage<T> {
    fn stage(self, stage: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Stage<T> for Result<T, LabError> {
    fn stage(self, stage: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Pipeline { stage: stage(), source })
    }
}
