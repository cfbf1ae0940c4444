use thiserror::Error;

/// Command failure, mapped onto the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 3,
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Divergence { .. } => 2,
        }
    }

    /// The message without the category prefix.
    pub fn message(&self) -> String {
        match self {
            CliError::Parse(m) | CliError::Validation(m) => m.clone(),
            other => other.to_string(),
        }
    }
}

impl From<clustersync::Error> for CliError {
    fn from(e: clustersync::Error) -> Self {
        match e {
            clustersync::Error::Divergence { time } => CliError::Divergence { time },
            other => CliError::Validation(other.to_string()),
        }
    }
}
