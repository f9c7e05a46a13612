use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not unitary within tolerance {tol:e}")]
    NotUnitary { tol: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("unknown point group `{0}`")]
    UnknownGroup(String),
    #[error("orbit seed must be nonzero")]
    ZeroSeed,
    #[error("matrix set is not closed under multiplication")]
    NotAGroup,
    #[error("generating set has no linearly independent subset of full size")]
    DegenerateSet,
    #[error("torus side {n} too small, need at least {required}")]
    TorusTooSmall { n: usize, required: usize },
    #[error("eigenphases are degenerate at this momentum")]
    DegeneratePoint,
    #[error("group element maps generator {0} outside the generating set")]
    NotAnAction(String),
    #[error("invalid family parameters: {0}")]
    InvalidFamilyParams(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("feasibility search inconclusive: best residual {0:e}")]
    Inconclusive(f64),
    #[error("classification inconclusive for {0} candidate(s)")]
    PipelineInconclusive(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
