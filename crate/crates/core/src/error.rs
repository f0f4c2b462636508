use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The logarithm was asked for a rotation at (or numerically at) a half turn.
    #[error("logarithm outside the principal branch (rotation angle {angle:.6} rad)")]
    Branch { angle: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("sensor index {index} out of range for {count} sensor(s)")]
    SensorIndex { index: usize, count: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("time step must be positive, got {0}")]
    TimeStep(f64),

    #[error("update rejected: {0}")]
    UpdateRejected(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("no samples at or after t0 = {t0} s")]
    EmptyWindow { t0: f64 },

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by numerics rather than by input data or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Branch { .. } | Error::UpdateRejected(_) | Error::Singular(_) | Error::NonFinite(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
