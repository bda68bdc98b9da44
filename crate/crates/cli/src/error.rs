use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    MissingInput(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: extremal_core::Error,
    },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(extremal_core::Error) -> Self {
        move |source| CliError::Stage { stage, source }
    }

    /// 0 success, 2 validation, 3 convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        use extremal_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::MissingInput(_) | CliError::Io { .. } | CliError::Json { .. } => 4,
            CliError::Stage { source, .. } => match source {
                E::NonConvergence(_) => 3,
                E::Io(_) | E::Csv(_) => 4,
                _ => 2,
            },
        }
    }
}
