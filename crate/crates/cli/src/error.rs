use std::path::{Path, PathBuf};

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flag value or malformed input file.
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] gptcca_core::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 input/validation, 3 rank/shape contract, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use gptcca_core::Error as E;
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::Rank { .. } | E::Shape(_) => 3,
                E::NumericalFailure { .. } | E::DegenerateComponent { .. } => 4,
                E::Contract(_) | E::Format(_) | E::Io(_) => 2,
            },
        }
    }
}
