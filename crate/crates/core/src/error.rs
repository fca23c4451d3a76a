use alloc::string::String;

/// Errors reported by graph construction, solvers and estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("edge {edge} refers to an undeclared vertex")]
    DanglingEndpoint { edge: usize },
    #[error("duplicate vertex label at position {0}")]
    DuplicateVertex(usize),
    #[error("edge {edge} has invalid length {length}")]
    InvalidLength { edge: usize, length: f64 },
    #[error("vertex {0} has degree zero")]
    IsolatedVertex(usize),
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("condition at vertex {vertex}: {reason}")]
    InvalidCondition { vertex: usize, reason: String },
    #[error("vertex conditions violate self-adjointness: {0}")]
    ConditionViolations(String),
    #[error("condition assignment has {got} entries but the graph has {expected} vertices")]
    AssignmentSize { expected: usize, got: usize },
    #[error("energy {value} lies outside the window [{lo}, {hi}]")]
    OutsideWindow { value: f64, lo: f64, hi: f64 },
    #[error("vertex {0} carries a condition the discretization does not support")]
    UnsupportedCondition(usize),
    #[error("operators are defined on different metric graphs")]
    GraphMismatch,
    #[error("subgraph is not edge-aligned: {0}")]
    NotEdgeAligned(String),
    #[error("mu = {0} lies outside [0, 2]")]
    MuOutOfRange(f64),
    #[error("hexagon at cell ({0}, {1}) is not interior to the patch")]
    HexagonNotInterior(i64, i64),
    #[error("density family rejected: {0}")]
    NotC1(&'static str),
    #[error("invalid length bounds [{min}, {max}]")]
    InvalidBounds { min: f64, max: f64 },
    #[error("sample is not attached to a periodic graph")]
    NotPeriodic,
    #[error("interval [{lo}, {hi}] leaves the energy window [{wlo}, {whi}]")]
    IntervalOutsideWindow { lo: f64, hi: f64, wlo: f64, whi: f64 },
    #[error("box of size {n} cannot buffer a centre cell by {buffer} cells")]
    BoxTooSmall { n: usize, buffer: usize },
    #[error("half-width {eps} is below the solver resolution {resolution}")]
    BelowResolution { eps: f64, resolution: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
