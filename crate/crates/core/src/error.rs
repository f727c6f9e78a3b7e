use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent or malformed dataset layout.
    Schema(String),
    EmptyDataset,
    Duplicate { point: String, t: usize },
    /// A feature dimension has zero variance over all active entries.
    DegenerateFeature { dim: usize },
    InsufficientData { point: String, window: usize },
    /// Per-time minimum preference requested at a step with a single point.
    UndefinedMinimum { t: usize },
    NoExemplar { t: usize, iteration: usize },
    NoNeighbor { t: usize },
    UndefinedMetric(&'static str),
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Schema(msg) => write!(f, "schema error: {msg}"),
            Error::EmptyDataset => f.write_str("dataset is empty"),
            Error::Duplicate { point, t } => {
                write!(f, "duplicate observation for point `{point}` at t={t}")
            }
            Error::DegenerateFeature { dim } => {
                write!(f, "feature dimension {dim} has zero variance")
            }
            Error::InsufficientData { point, window } => write!(
                f,
                "point `{point}` has insufficient or degenerate observations in window {window}"
            ),
            Error::UndefinedMinimum { t } => write!(
                f,
                "minimum off-diagonal similarity is undefined at t={t} (fewer than two points)"
            ),
            Error::NoExemplar { t, iteration } => write!(
                f,
                "no exemplar identified at t={t} after iteration {iteration}; preferences may be too low"
            ),
            Error::NoNeighbor { t } => write!(f, "no neighbour candidates at t={t}"),
            Error::UndefinedMetric(term) => write!(f, "metric undefined: {term}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
