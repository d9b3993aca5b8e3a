use thiserror::Error;

/// Errors raised by the testing pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("group {group} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        group: usize,
        expected: usize,
        found: usize,
    },
    #[error("at least two groups are required, got {0}")]
    TooFewGroups(usize),
    #[error("group {group} has {n} observations, at least two are required")]
    TooFewObservations { group: usize, n: usize },
    #[error("non-finite entry in group {group} at row {row}, column {col}")]
    NonFiniteEntry { group: usize, row: usize, col: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("invalid pair set: {0}")]
    InvalidPairs(String),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("pooled scale of coordinate {j} for pair ({k}, {l}) is zero while tau > 0")]
    DegenerateCoordinate { k: usize, l: usize, j: usize },
    #[error("quantile level {0} is outside (0, 1]")]
    BadQuantileLevel(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("grid of {m} points is too coarse, at least {required} are needed")]
    GridTooCoarse { m: usize, required: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unsupported Matern smoothness {0}; only half-integers are implemented")]
    UnsupportedSmoothness(f64),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("bad budget: {0}")]
    BadBudget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
