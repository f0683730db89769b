use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// 1-based rendering of an index tuple, matching the file formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTuple(pub Vec<usize>);

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("expected {expected} indices, got {got}")]
    OrderMismatch { expected: usize, got: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("{class} class violated at {first} vs {second}: {detail}")]
    ClassViolation { class: &'static str, first: IndexTuple, second: IndexTuple, detail: String },

    #[error("flavor mismatch: {0}")]
    FlavorMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("group element check failed: {0}")]
    NotInGroup(String),

    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),

    #[error("invalid trace graph: {0}")]
    InvalidGraph(String),

    #[error("contraction plan needs an intermediate of {entries} entries")]
    PlanTooLarge { entries: u128 },

    #[error("imaginary part {imag:e} exceeds tolerance for a real invariant")]
    NotReal { imag: f64 },

    #[error("insufficient samples: {got} < {min}")]
    InsufficientSamples { got: usize, min: usize },

    #[error("isotropy test needs at least 3 flattened coordinates, got {0}")]
    TooFewCoordinates(usize),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
