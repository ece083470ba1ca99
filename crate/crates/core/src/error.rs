use thiserror::Error;

/// Errors raised by the counting kernels and structure pipelines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field size {p}^{r} exceeds the configured cap of {cap} elements")]
    FieldTooLarge { p: u64, r: u32, cap: u64 },
    #[error("{k} does not divide the extension degree {r}")]
    NotADivisor { k: u32, r: u32 },
    #[error("operation requires characteristic {expected}, field has characteristic {actual}")]
    WrongCharacteristic { expected: &'static str, actual: u32 },
    #[error("sets live in different fields")]
    FieldMismatch,
    #[error("element encoding {0} is outside the field")]
    OutOfField(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("cost guard: {0}")]
    CostGuard(String),
    #[error("stage `{stage}` produced an empty selection")]
    EmptySelection { stage: &'static str },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
