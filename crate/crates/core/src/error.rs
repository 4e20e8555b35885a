use thiserror::Error;

/// Errors raised by the clustering library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CecError {
    #[error("empty sample")]
    EmptySample,

    #[error("difference would be empty or negative ({superset} - {subset} points)")]
    NonPositiveDifference { superset: usize, subset: usize },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("more dimensions than points ({points} points in dimension {dim})")]
    TooFewPoints { points: usize, dim: usize },

    #[error("cannot choose {k} centers from {n} points")]
    TooManyCenters { k: usize, n: usize },

    #[error("no clusters remain")]
    NoClusters,

    #[error("degenerate initialization after {attempts} attempts")]
    DegenerateInitialization { attempts: usize },

    #[error("oracle size exceeded: n = {n}, k = {k}")]
    OracleSizeExceeded { n: usize, k: usize },

    #[error("ellipse emission requires 2-D data (got dimension {0})")]
    EllipseDimension(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, CecError>;
