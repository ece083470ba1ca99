use diffprod_core::LabError;
use thiserror::Error;

/// Failures that end a run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cost guard: {0}")]
    CostGuard(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Assertion(_) => 1,
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::CostGuard(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config-error",
            RunError::CostGuard(_) => "cost-guard",
            RunError::Assertion(_) => "assertion-failure",
            RunError::Io(_) => "io-error",
        }
    }
}

impl From<LabError> for RunError {
    fn from(e: LabError) -> Self {
        let msg = e.to_string();
        match e {
            LabError::CostGuard(_) | LabError::FieldTooLarge { .. } => RunError::CostGuard(msg),
            LabError::InvariantViolation(_) | LabError::EmptySelection { .. } => RunError::Assertion(msg),
            _ => RunError::Config(msg),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.to_string())
    }
}
