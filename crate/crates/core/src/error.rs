use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cell `{id}`: {reason}")]
    InvalidCell { id: String, reason: String },

    #[error("duplicate cell id `{id}` (rows {first} and {second})")]
    DuplicateCell { id: String, first: usize, second: usize },

    #[error("invalid cost parameters: {0}")]
    InvalidParams(String),

    #[error("invalid prices: {0}")]
    InvalidPrices(String),

    #[error("invalid uncertainty box: {0}")]
    InvalidBox(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("granularity must be at least 1 kW")]
    InvalidGranularity,

    #[error(
        "granularity too fine: the DP table needs {required} cells \
         ({items} items x {columns} capacity columns), limit is {limit}"
    )]
    GranularityTooFine {
        required: u128,
        items: usize,
        columns: u64,
        limit: u128,
    },

    #[error("brute force enumerates at most {limit} cells, instance has {cells}")]
    TooManyCells { cells: usize, limit: usize },

    #[error("plan does not match the instance: {0}")]
    PlanMismatch(String),

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("cell `{0}` has no centroid; GeoJSON export needs lon/lat columns")]
    MissingCentroid(String),

    #[error("line {row}: {reason}")]
    Row { row: usize, reason: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
