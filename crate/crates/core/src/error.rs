use thiserror::Error;

/// Errors surfaced by the lattice, Orlicz and simulation layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("corner mask references coordinate {coord} but dimension is {dim}")]
    InvalidMask { coord: usize, dim: usize },

    #[error("corner {corner:?} is not dominated by rectangle upper bound {upper:?}")]
    InvalidCorner { corner: Vec<i64>, upper: Vec<i64> },

    #[error("empty sample set")]
    EmptyInput,

    #[error("inverse of {kind} is not supported for d = {d}: {reason}")]
    UnsupportedInverse {
        kind: &'static str,
        d: usize,
        reason: String,
    },

    #[error("condition {condition} is not computable for this field model ({model})")]
    NotComputable {
        condition: &'static str,
        model: &'static str,
    },

    #[error("variance must be positive, got {0}")]
    InvalidVariance(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}
