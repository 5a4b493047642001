use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative input component {value} at index {index}")]
    NegativeComponent { index: usize, value: f64 },

    #[error("input component at index {index} is not finite")]
    NotFinite { index: usize },

    #[error("zero input vector has no simplex projection")]
    ZeroVector,

    #[error("unknown technology family `{0}`")]
    UnknownFamily(String),

    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("malformed technology record: {0}")]
    Malformed(String),

    #[error("grid has {count} points, exceeding the cap of {cap}")]
    GridTooLarge { count: u128, cap: u128 },

    #[error("search has {count} candidate combinations, exceeding the cap of {cap}")]
    SearchTooLarge { count: u128, cap: u128 },

    #[error("boundary point: supergradient not guaranteed (requires strictly positive input)")]
    BoundaryPoint,

    #[error("firm {firm} has a non-concave technology")]
    NonConcave { firm: usize },

    #[error("engine not applicable: {0}")]
    Unsupported(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("linear program failed: {0}")]
    Numerical(String),

    #[error("no plan with at most {limit} active firms reaches {target} within {tol}")]
    NoSparsePlan { limit: usize, target: f64, tol: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
