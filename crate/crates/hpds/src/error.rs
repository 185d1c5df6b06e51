//! Crate-wide error type.

/// Errors produced by tensor operations, decompositions, and system analyses.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("tensor is not cubical: dims {0:?}")]
    NotCubical(Vec<usize>),

    #[error("entries must be finite")]
    NonFinite,

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("zero tensor has no principal directions")]
    ZeroTensor,

    #[error("tensor is not symmetric: max deviation {max_dev:.3e} exceeds tol {tol:.3e}")]
    NotSymmetric { max_dev: f64, tol: f64 },

    #[error("tensor is not almost symmetric: max deviation {max_dev:.3e} exceeds tol {tol:.3e}")]
    NotAlmostSymmetric { max_dev: f64, tol: f64 },

    #[error(
        "tensor is not orthogonally decomposable: relative off-diagonal core mass {mass:.3e} exceeds tol {tol:.3e}"
    )]
    NotOdeco { mass: f64, tol: f64 },

    #[error("requested rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error(
        "strong controllability is certified only for even tensor order; order {order} is odd, \
         where the rank test certifies only accessibility (a weaker reachability notion)"
    )]
    OddOrderControllability { order: usize },

    #[error("model has no input matrix")]
    InputMatrixAbsent,

    #[error("model has no output matrix")]
    OutputMatrixAbsent,

    #[error("reduced model carries no projection basis")]
    ProjectionAbsent,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
