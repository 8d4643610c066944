use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("spec error: {0}")]
    Spec(String),
    #[error("computation error: {0}")]
    Computation(#[from] smb_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Computation(_) | CliError::Io(_) => 2,
            CliError::Config(_) | CliError::Spec(_) | CliError::SchemaMismatch(_) => 3,
        }
    }
}
