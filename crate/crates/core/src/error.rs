use thiserror::Error;

/// A violated constraint on [`SystemParams`](crate::SystemParams).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be a finite rate > 0, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("n0 must be >= 1 (legacy block cannot be empty), got {0}")]
    EmptyLegacyBlock(i64),
    #[error("k must be >= 0, got {0}")]
    NegativeInstances(i64),
    #[error("K must be >= N = n0 + k = {servers}, got K = {capacity}")]
    CapacityBelowServers { capacity: i64, servers: i64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamError),

    #[error("state ({level}, {jobs}) is not in the state space")]
    OutOfDomain { level: usize, jobs: usize },

    #[error("numerical fault at level {level}, j = {jobs}: {detail}")]
    NumericalFault {
        level: usize,
        jobs: usize,
        detail: String,
    },

    #[error("dense oracle refused {states} states (limit {limit})")]
    OracleTooLarge { states: usize, limit: usize },

    #[error("singular generator system at column {0}")]
    Singular(usize),

    #[error("response time undefined: every arrival is blocked")]
    AllBlocked,

    #[error("invalid cost specification: {0}")]
    Cost(String),

    #[error("invalid simulation config: {0}")]
    SimConfig(String),

    #[error("parameter mismatch between analytical and simulated inputs: {0}")]
    Mismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
