use thiserror::Error;

/// Errors raised by the dynamical-systems toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid alphabet: size {0} (need at least 2)")]
    InvalidAlphabet(usize),
    #[error("the subshift is empty")]
    EmptySystem,
    #[error("invalid interval homeomorphism: {0}")]
    InvalidHomeo(String),
    #[error("point is not in the phase space: {0}")]
    InvalidPoint(String),
    #[error("horizon exhausted: needed {needed} symbols, only {available} known")]
    HorizonExhausted { needed: usize, available: usize },
    #[error("insufficient evidence: {0}")]
    InsufficientEvidence(String),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("pool of {size} points is too large for exhaustive search (limit {limit})")]
    PoolTooLarge { size: usize, limit: usize },
    #[error("not a cover: target point {0} is not inside any ball")]
    NotACover(usize),
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("sampler failed: {0}")]
    SamplerError(String),
    #[error("pseudo-orbit gap too large for the tracer: {0}")]
    ModulusViolation(String),
    #[error("internal invariant violated: {0}")]
    InternalError(String),
    #[error("schedule overflows at depth {0}")]
    DepthTooLarge(usize),
    #[error("no segment matches the target measure within tolerance {tolerance}; try a larger segment length")]
    ToleranceTooTight { tolerance: f64 },
    #[error("junction gap {gap} at block {block} is not below {delta}")]
    JunctionViolation { block: usize, gap: f64, delta: f64 },
    #[error("entropy deficit: {0}")]
    EntropyDeficit(String),
    #[error("invalid entropy slack {0}: must lie in (0,1)")]
    InvalidSlack(f64),
    #[error("shrunk cores are empty: {0}")]
    EmptyCore(String),
    #[error("map image {0:?} leaves the unit square")]
    RangeError([f64; 2]),
    #[error("cannot certify trapping: {0}")]
    CannotCertify(String),
    #[error("continuity budget exceeded in cell {cell}: margin {margin} vs budget {budget}")]
    ContinuityBudgetExceeded { cell: usize, margin: f64, budget: f64 },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
