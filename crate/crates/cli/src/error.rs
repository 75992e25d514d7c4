use sfa_core::SfaError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Tolerance(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<SfaError> for CliError {
    fn from(e: SfaError) -> Self {
        match e {
            SfaError::ResourceLimit(m) => CliError::Resource(m),
            SfaError::NumericFailure(m) => CliError::Tolerance(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}
