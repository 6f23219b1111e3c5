use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input coordinate at index {index}")]
    NonFiniteInput { index: usize },

    #[error("complex point passed to a real-field map (coordinate {index})")]
    ComplexPointOnRealMap { index: usize },

    #[error("evaluation overflowed to a non-finite value at iteration step {step}")]
    Overflow { step: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("operation requires a univariate map (N = 1), got N = {0}")]
    Unsupported(usize),

    #[error("iterate degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: u128, cap: u128 },

    #[error("the iterate minus identity vanishes identically: every point is periodic (nonisolated continuum)")]
    NonisolatedContinuum,

    #[error("seed plan produced no seeds")]
    NoSeeds,

    #[error("inconsistent orbit input: {0}")]
    InconsistentOrbit(String),

    #[error("orbit does not close under the map (gap {gap:.3e})")]
    OrbitNotClosed { gap: f64 },

    #[error("lambda0 = {re}+{im}i is not on the unit circle")]
    OffUnitCircle { re: f64, im: f64 },

    #[error("census row {n} is {reason}; zeta requires exact isolated counts")]
    FlaggedRow { n: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every sampled trial failed")]
    AllTrialsFailed,

    #[error("displacement is flat up to the map degree at x0 = {x0}")]
    FlatAtDegree { x0: f64 },

    #[error("split target {requested} exceeds the cap {cap}{}", largest_feasible.map(|n| format!(" (largest feasible n1 = {n})")).unwrap_or_default())]
    SplitCap {
        requested: u64,
        cap: u64,
        largest_feasible: Option<u64>,
    },

    #[error("split verification failed after {attempts} attempts: {detail}")]
    SplitVerification { attempts: usize, detail: String },

    #[error("elimination scope exceeded: {0}")]
    EliminationScope(String),

    #[error("resultant vanishes identically: {0}")]
    ZeroResultant(String),

    #[error("lambda0 slice vanishes identically")]
    ZeroSlice,

    #[error("inexact polynomial division: {0}")]
    InexactDivision(String),

    #[error("eigenvalue computation failed to converge")]
    Eigen,

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
