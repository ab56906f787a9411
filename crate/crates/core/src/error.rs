use thiserror::Error;

/// Errors produced by the library and surfaced by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error(
        "unsupported shape for embedding: interval has {mins} minimal and {maxs} maximal points"
    )]
    UnsupportedShape { mins: usize, maxs: usize },

    #[error("invalid thickening radius {0}")]
    InvalidRadius(f64),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("empty domain")]
    EmptyDomain,

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("containment cycle between domain intervals {0} and {1}")]
    ContainmentCycle(usize, usize),

    #[error("singular system in exact elimination")]
    SingularSystem,

    #[error("requested {m} intervals from a domain of {n}; use explicit init or reduce m")]
    SubsetTooLarge { m: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite {what} at epoch {epoch}")]
    NonFinite { what: &'static str, epoch: usize },

    #[error("series too short: {len} samples for embedding dimension {dim}")]
    SeriesTooShort { len: usize, dim: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 invalid arguments, 3 file-format
    /// violation, 4 internal invariant failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_) => 3,
            Error::ContainmentCycle(..) | Error::SingularSystem | Error::NonFinite { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
