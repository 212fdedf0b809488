use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not a projector (max deviation {deviation:e})")]
    NotProjector { deviation: f64 },

    #[error("projector is not rank one (trace {trace})")]
    NotRankOne { trace: f64 },

    #[error("invalid dichotomic observable: {0}")]
    InvalidObservable(&'static str),

    #[error("matrix of size {len} is not square of dimension {dim}")]
    Shape { dim: usize, len: usize },

    #[error("post-selected state is orthogonal to the pre-selected state (overlap {overlap_sq:e})")]
    OrthogonalPostSelection { overlap_sq: f64 },

    #[error("{name} = {value} is out of range: {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("shots must be at least 1")]
    ZeroShots,

    #[error("unsupported configuration: {0}")]
    Unsupported(&'static str),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
