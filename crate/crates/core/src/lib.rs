//! Capacity planning for a server farm made of an always-on legacy block
//! plus `k` dynamically powered instances with setup delay.
//!
//! * [`solver`] computes the exact stationary distribution of the
//!   `(active instances, jobs)` chain in time linear in the state count,
//!   with a dense linear-algebra oracle for validation.
//! * [`optimizer`] picks the instance count `k` from a latency/cost trade-off.
//! * [`sim`] is a discrete-event simulator of the same system, used to
//!   cross-check the analysis and to try non-exponential distributions.

pub mod error;
pub mod metrics;
pub mod optimizer;
pub mod params;
pub mod sim;
pub mod solver;
pub mod state;

pub use error::{Error, ParamError, Result};
pub use metrics::{Metric, PerformanceMetrics};
pub use optimizer::{BaseParams, CostSpec, CostWeights, KScan, OptimizationResult, ScanRow};
pub use params::{RawParams, SystemParams};
pub use sim::{
    compare, simulate, simulate_once, Comparison, ComparisonRow, DistributionSpec, Family, Estimate, ReplicationStats,
    SimConfig, SimulationResult,
};
pub use solver::{dense_oracle, solve, RecursionCoefficients, SolveReport};
pub use state::{StateSpace, StationaryDistribution, Transition, TransitionKind};
