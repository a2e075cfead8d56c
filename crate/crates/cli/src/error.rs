use thiserror::Error;

/// Failures of the experiment harness, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or invalid configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// A run or file operation violated its contract; exit code 3.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn at(line: usize, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("line {line}: {msg}"))
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn is_config(&self) -> bool {
        matches!(self, CliError::Config(_))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}
