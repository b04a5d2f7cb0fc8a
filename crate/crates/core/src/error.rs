use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("point outside the function domain: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("duplicate locations at indices {0:?}")]
    DuplicateLocations(Vec<(usize, usize)>),
    #[error("kernel matrix is not numerically positive definite at epsilon = {epsilon}")]
    Conditioning { epsilon: f64 },
    #[error("collocation matrix is rank deficient (column {column}) at epsilon = {epsilon}")]
    RankDeficient { epsilon: f64, column: usize },
    #[error("division by zero: {0}")]
    Division(String),
    #[error("search failed: every candidate epsilon failed")]
    SearchFailed,
    #[error("gaussian process fit failed even with maximal jitter")]
    SurrogateFit,
    #[error("optimization failed: every objective evaluation failed")]
    OptimizationFailed,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
