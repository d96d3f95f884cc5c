use pairform::PairError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Pair(#[from] PairError),
    /// A claimed form that does not reproduce its input.
    #[error("verification failed: {0}")]
    Rejected(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Pair(e) if e.is_validation() => 1,
            CliError::Rejected(_) => 1,
            CliError::Pair(_) => 2,
            CliError::Io { .. } | CliError::Parse(_) => 3,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}
