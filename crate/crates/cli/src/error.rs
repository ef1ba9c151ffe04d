use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Math(#[from] asymcon::Error),

    #[error("{0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Math(e) => e.name(),
            CliError::Verification(_) => "VerificationFailed",
            CliError::Io(_) => "IoError",
            CliError::Csv(_) => "CsvError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) => 2,
            CliError::Math(asymcon::Error::InvalidInput(_)) => 2,
            CliError::Math(e) if e.is_verification() => 4,
            CliError::Math(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
