use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("matrix is numerically singular (pivot {pivot:e} below threshold)")]
    Singular { pivot: f64 },

    #[error("invalid stage vitals at stage {stage}: {reason}")]
    InvalidVitals { stage: usize, reason: String },

    #[error("invalid dispersion for stage {stage}, source patch {patch}: {reason}")]
    InvalidDispersion {
        stage: usize,
        patch: usize,
        reason: String,
    },

    #[error("self-loop transmission {rate} at node \"{node}\" is too close to 1 to absorb")]
    SingularLoop { node: String, rate: f64 },

    #[error("cycle enumeration aborted: more than {limit} simple cycles")]
    CycleLimit { limit: usize },

    #[error("no sign change of {what} found on [{lo}, {hi}]")]
    NoRoot { what: String, lo: f64, hi: f64 },

    #[error("transmission denominator {denominator} is not positive (isolated-patch degeneracy)")]
    DegenerateTransmission { denominator: f64 },

    #[error("not a normalized nonnegative distribution: {0}")]
    NotNormalized(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
