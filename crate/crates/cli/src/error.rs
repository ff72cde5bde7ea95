use thiserror::Error;

/// Failures that end a command. Input errors exit with 2; unmet hypotheses
/// and violated bounds exit with 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Hypothesis(_) => 1,
        }
    }
}
