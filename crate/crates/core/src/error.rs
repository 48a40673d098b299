use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("polynomial is not real-rooted ({real} real roots counted, degree {degree})")]
    NotRealRooted { real: usize, degree: usize },
    #[error("duplicate interpolation node at abscissa {0}")]
    DuplicateNode(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector {index} has hyperbolic rank {rank} (at most 1 required)")]
    RankTooHigh { index: usize, rank: usize },
    #[error("invalid hyperbolic instance: {0}")]
    InvalidInstance(String),
    #[error("variable index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("enumeration too large: {count} branches exceed the limit {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error("value {value} is not in the support of variable {index}")]
    ValueNotInSupport { index: usize, value: String },
    #[error("no support set extends the given prefix")]
    EmptyBranch,
    #[error("polynomials have mismatched degrees or non-positive leading coefficients")]
    DegreeMismatch,
    #[error("no admissible child at depth {depth}: best child root {best} exceeds parent root {parent}")]
    NoAdmissibleChild { depth: usize, best: f64, parent: f64 },
    #[error("point is not above the roots: {0}")]
    NotAboveRoots(String),
    #[error("bound chain violated at step `{step}`: {detail}")]
    ChainViolated { step: String, detail: String },
    #[error("insufficient margin: {0}")]
    InsufficientMargin(String),
    #[error("k must be even and at least 2 (got {0})")]
    OddK(usize),
    #[error("instance is not a determinant rank-one instance: {0}")]
    NotDeterminantInstance(String),
    #[error("k = {0} is too large for the minor-formula oracle")]
    KTooLarge(usize),
    #[error("oracle failure: {0}")]
    OracleFailure(String),
    #[error("certification failed: recomputed norm {certified} exceeds bound {bound}")]
    CertificationFailed { certified: f64, bound: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
