use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("invalid unit vector: {0}")]
    InvalidUnitVector(String),
    #[error("invalid directional distribution: {0}")]
    InvalidDistribution(String),
    #[error("unsupported body: {0}")]
    UnsupportedBody(String),
    #[error("rejection sampler stalled: {accepted} accepted out of {proposals} proposals")]
    RejectionStall { proposals: u64, accepted: u64 },
    #[error("infeasible cap budget: {0}")]
    InfeasibleBudget(String),
    #[error("origin is not interior to the body (min support value {min_support})")]
    OriginOutside { min_support: f64 },
    #[error("bodies are not nested: h(inner, u) exceeds h(outer, u) by {excess} at u = {direction:?}")]
    NotNested { direction: Vec<f64>, excess: f64 },
    #[error("halfspace intersection is unbounded")]
    Unbounded,
    #[error("window overflow after {rounds} growth rounds (radius {radius})")]
    WindowOverflow { rounds: usize, radius: f64 },
    #[error("containment certificate violated: h(K, u) - t = {excess} for halfspace {index}")]
    ContainmentViolated { index: usize, excess: f64 },
    #[error("invalid epsilon {0}: must be positive")]
    InvalidEpsilon(f64),
    #[error("tail probability estimate is zero on the whole grid")]
    AllZeroTail,
    #[error("coupled cells violated monotonicity: {violations} increases of delta along the grid")]
    CouplingViolated { violations: usize },
    #[error("degenerate regression: all x values are equal")]
    DegenerateX,
    #[error("intersection kernels disagree: {0}")]
    OracleMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
