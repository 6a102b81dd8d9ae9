use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table dimensions must be at least 1x1, got {n_cols} columns x {n_rows} rows")]
    EmptyShape { n_cols: usize, n_rows: usize },

    #[error("cell ({col}, {row}) is outside a table of {n_cols} columns x {n_rows} rows")]
    OutOfRange {
        col: usize,
        row: usize,
        n_cols: usize,
        n_rows: usize,
    },

    #[error("dimension mismatch: {left_cols}x{left_rows} vs {right_cols}x{right_rows}")]
    DimensionMismatch {
        left_cols: usize,
        left_rows: usize,
        right_cols: usize,
        right_rows: usize,
    },

    #[error("column {col} holds {marks} marks, a function holds at most one")]
    NotAFunction { col: usize, marks: usize },

    #[error("reduction undefined: the cue is not contained in the relation")]
    ReductionUndefined,

    #[error("retrieval undefined: no register accepts the cue")]
    RetrievalUndefined,

    #[error("invalid sigma {0}: must be finite and positive")]
    InvalidSigma(f64),

    #[error("constituent enumeration would produce {count} functions, cap is {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("function is undefined on columns {0:?}")]
    PartialFunction(Vec<usize>),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid quantizer configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed corpus record {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },

    #[error("bad format: {0}")]
    Format(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("not enough training instances: label {label:?} has {available}, step requires {required}")]
    TooFewInstances {
        label: String,
        available: usize,
        required: usize,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
