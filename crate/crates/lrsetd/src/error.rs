use std::path::PathBuf;

/// Errors surfaced by the runner, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] lrsetd_core::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 2 for configuration errors, 3 for I/O and file-format errors, 4 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        use lrsetd_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } | Self::Format { .. } => 3,
            Self::Core(E::NotPositiveDefinite | E::NonFinite(_)) => 4,
            Self::Core(_) => 2,
        }
    }
}
