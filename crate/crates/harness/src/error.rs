use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Sim(#[from] wellopt_reservoir::SimError),

    #[error(transparent)]
    Core(#[from] wellopt_core::CoreError),
}

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Usage(_) | Self::Json(_) => 1,
            Self::Sim(wellopt_reservoir::SimError::InvalidModel(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
