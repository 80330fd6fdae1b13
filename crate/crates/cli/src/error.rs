use lts_core::LtsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Convergence(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    /// Prefixes the message with the scenario name.
    pub fn in_scenario(self, name: &str) -> Self {
        let tag = |m: String| format!("scenario `{name}`: {m}");
        match self {
            CliError::Parse(m) => CliError::Parse(tag(m)),
            CliError::Validation(m) => CliError::Validation(tag(m)),
            CliError::Convergence(m) => CliError::Convergence(tag(m)),
            CliError::Io(m) => CliError::Io(tag(m)),
        }
    }
}

impl From<LtsError> for CliError {
    fn from(e: LtsError) -> Self {
        match e {
            LtsError::QuadratureNotConverged { .. } | LtsError::IntegrationFailure(_) => {
                CliError::Convergence(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
