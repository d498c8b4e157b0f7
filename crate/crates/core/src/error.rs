use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("flow must be nonnegative, got {0}")]
    NegativeFlow(f64),
    #[error("uniform draw must lie in the open interval (0, 1), got {0}")]
    DrawOutOfRange(f64),
    #[error("experienced travel time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("unknown strategy '{0}' (expected Selfish, Altruistic, Malicious, Disruptive or Social)")]
    UnknownStrategy(String),
    #[error("fleet split {cav_on_a} is outside [0, {fleet}]")]
    SplitOutOfRange { cav_on_a: usize, fleet: usize },
    #[error("population must contain at least one vehicle")]
    EmptyPopulation,
    #[error("invalid `{field}`: {message}")]
    InvalidField { field: String, message: String },
    #[error("M-day replacement has already been applied")]
    MdayAlreadyApplied,
    #[error("simulation already ran all {0} days")]
    SimulationFinished(u32),
    #[error("window [{first}, {last}] is empty or outside the log")]
    EmptyWindow { first: u32, last: u32 },
    #[error("samples must have equal length of at least 2 (got {left} and {right})")]
    SampleShape { left: usize, right: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Whether the error stems from user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv(_))
    }
}
