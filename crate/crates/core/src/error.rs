use thiserror::Error;

/// Every failure surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    DisconnectedGraph(usize),
    #[error("edge ({u}, {v}) has non-positive length {len}")]
    NonPositiveEdge { u: usize, v: usize, len: i64 },
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("invalid request {index}: {reason}")]
    InvalidRequest { index: usize, reason: String },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("infeasible walk: {}", .0.join("; "))]
    InfeasibleWalk(Vec<String>),

    #[error("index {index} out of range ({len} requests)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("matching kind mismatch: {0}")]
    KindMismatch(String),
    #[error("request sequences differ in size: {true_len} vs {pred_len}")]
    SizeMismatch { true_len: usize, pred_len: usize },

    #[error("state budget exceeded: {required} states required, budget is {budget}")]
    StateBudgetExceeded { required: u128, budget: u128 },
    #[error("too many orienteering targets: {0} (limit 15)")]
    TooManyTargets(usize),
    #[error("too many jobs for exact scheduling: {0} (limit 15)")]
    TooManyJobs(usize),

    #[error("service time {service} exceeds the minimum window length {l_min}")]
    ServiceExceedsWindow { service: i64, l_min: i64 },
    #[error("service time {service} exceeds the graph diameter {diameter}")]
    ServiceExceedsDiameter { service: i64, diameter: i64 },
    #[error("window of request {index} has length {len}, below the required {required}")]
    WindowTooSmall { index: usize, len: i64, required: i64 },

    #[error("precomputed walk is infeasible: {}", .0.join("; "))]
    InfeasiblePrecomputedWalk(Vec<String>),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("perturbation targets violate the conforming assumptions: {0}")]
    TargetsViolateAssumptions(String),

    #[error("bad suite file: {0}")]
    BadSuiteFile(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
