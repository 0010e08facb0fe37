use thiserror::Error;

pub type Result<T> = std::result::Result<T, GwError>;

#[derive(Debug, Error)]
pub enum GwError {
    #[error("point clouds must have equal cardinality, got {0} and {1}")]
    SizeMismatch(usize, usize),

    #[error("cloud dimension {dim} exceeds the limit {max}; raise the limit explicitly to allow this")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("non-finite coordinate at point {point}, component {component}")]
    NonFinite { point: usize, component: usize },

    #[error("projected dimension r = {r} exceeds the cap {cap}; vertex enumeration would be intractable")]
    ProjDimTooLarge { r: usize, cap: usize },

    #[error("matrix is not a valid coupling: {0}")]
    InvalidCoupling(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("cut removed every vertex of the cover; the cover no longer contains the feasible image")]
    InfeasibleCut,

    #[error("polytope cover is empty")]
    EmptyCover,

    #[error("vertex count {count} exceeds the cap {cap}; increase epsilon or the vertex cap")]
    VertexCapExceeded { count: usize, cap: usize },

    #[error("brute force enumeration is limited to n <= {max}, got n = {n}")]
    BruteForceTooLarge { n: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
