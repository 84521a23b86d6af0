use adjwald_core::Error as CoreError;

/// Failure classes of the harness, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("output error: {0}")]
    Output(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(_) => 2,
            CliError::Data(_) => 3,
            CliError::Config(_) => 4,
            CliError::Output(_) => 1,
        }
    }

    /// The message without its class prefix.
    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Model(m) | CliError::Output(m) => m,
        }
    }

    /// Errors raised while building a model from data are data errors.
    pub fn data(e: CoreError) -> Self {
        CliError::Data(e.to_string())
    }

    pub fn model(e: CoreError) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
