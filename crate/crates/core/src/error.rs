use thiserror::Error;

/// Errors raised by the geometry, LP, measure and ordering layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("degenerate ball: {0}")]
    DegenerateBall(String),

    #[error("ball vertices are not centrally symmetric: no antipode for vertex {0}")]
    NotSymmetric(usize),

    #[error("vertex {0} lies in the convex hull of the other vertices")]
    RedundantVertex(usize),

    #[error("dimension {dim} exceeds the enumeration bound {bound}")]
    DimensionBound { dim: usize, bound: usize },

    #[error("point is not on the dual unit sphere (dual norm {norm})")]
    NotOnSphere { norm: f64 },

    #[error("point lies outside the dual unit ball (dual norm {norm})")]
    OutsideBall { norm: f64 },

    #[error("operation requires a polytope ball")]
    NotPolytope,

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("simplex iteration limit reached")]
    IterationLimit,

    #[error("measure has a non-positive atom weight")]
    NotPositive,

    #[error("weights sum to {sum}, not 1")]
    NotProbability { sum: f64 },

    #[error("empty piece list for label {0}")]
    EmptyPieces(String),

    #[error("label {0} is not defined")]
    UnknownLabel(String),

    #[error("measure is not in N(mu): {0}")]
    NotInN(String),

    #[error("barycenters differ")]
    BarycenterMismatch,

    #[error("enumeration cap of {0} reached")]
    CapExceeded(usize),

    #[error("empty convex function")]
    EmptyFunction,
}

pub type Result<T> = std::result::Result<T, Error>;
