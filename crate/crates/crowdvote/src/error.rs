use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] crowdvote_core::Error),
    #[error("estimation was impossible on all {0} trials")]
    AllEstimationFailed(u64),
}

impl CliError {
    /// Process exit code: 1 config error, 2 cap exceeded, 3 estimation
    /// impossible on every trial.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(crowdvote_core::Error::CapExceeded { .. }) => 2,
            Self::AllEstimationFailed(_) => 3,
            _ => 1,
        }
    }
}
