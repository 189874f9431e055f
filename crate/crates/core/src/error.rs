use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class count mismatch: expected {expected}, found {found}")]
    ClassCountMismatch { expected: usize, found: usize },

    #[error("invalid track: {0}")]
    InvalidTrack(String),

    #[error("pool is empty")]
    EmptyPool,

    #[error("batch is empty")]
    EmptyBatch,

    #[error("step {t} out of range 1..={n}")]
    StepOutOfRange { t: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{format} parse error: {message}")]
    Parse { format: &'static str, message: String },

    #[error("heterogeneous trajectories: {0}")]
    Heterogeneous(String),

    #[error("missing timing data for {0}")]
    MissingTiming(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(format: &'static str, message: impl Into<String>) -> Self {
        Error::Parse {
            format,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
