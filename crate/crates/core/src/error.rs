use thiserror::Error;

/// Errors raised by the construction and the pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid growth sequence: {0}")]
    InvalidSequence(String),
    #[error("index {0} is not covered by any clause")]
    Uncovered(u64),
    #[error("index {index} is matched by several clauses: {clauses}")]
    Ambiguous { index: u64, clauses: String },
    #[error("index {index} is beyond the constructible range (limit {limit})")]
    OutOfRange { index: u64, limit: u64 },
    #[error("sign of entry ({row}, {col}) undecided at {bits} bits")]
    UndecidableSign { row: u64, col: u64, bits: u32 },
    #[error("precision ceiling of {bits} bits reached: {context}")]
    PrecisionCeiling { bits: u32, context: String },
    #[error("matrix maps the iterate to zero")]
    ZeroImage,
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 usage and I/O, 3 invalid sequence, 5 precision.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSequence(_) | Error::Uncovered(_) | Error::Ambiguous { .. } | Error::Parse(_) => 3,
            Error::UndecidableSign { .. } | Error::PrecisionCeiling { .. } => 5,
            Error::OutOfRange { .. } | Error::ZeroImage | Error::Usage(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
