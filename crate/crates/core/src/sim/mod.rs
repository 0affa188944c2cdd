//! Discrete-event simulation of the farm, for cross-checking the solver and
//! for non-exponential inter-arrival, service and setup times.
//!
//! Jobs are served first come first served by the lowest-numbered free
//! server. When a departure drops the number of setups that should be
//! running, the most recently started setup is cancelled.

mod dist;
mod engine;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::metrics::{Metric, PerformanceMetrics};
use crate::params::SystemParams;

pub use dist::{DistributionSpec, Family, Sampler};
pub use engine::ReplicationStats;
use engine::{Engine, Samplers};

/// Gaps below this are treated as covered even with a zero-width interval.
pub const COVERAGE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Simulated time per replication, seconds.
    pub horizon: f64,
    /// Initial stretch excluded from statistics; `None` means 10% of the
    /// horizon.
    pub warmup: Option<f64>,
    pub replications: usize,
    pub seed: u64,
    pub interarrival: Family,
    pub service: Family,
    pub setup: Family,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 3e5,
            warmup: None,
            replications: 30,
            seed: 1,
            interarrival: Family::Exponential,
            service: Family::Exponential,
            setup: Family::Exponential,
        }
    }
}

impl SimConfig {
    pub fn warmup_time(&self) -> f64 {
        self.warmup.unwrap_or(0.1 * self.horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::SimConfig(format!("horizon must be > 0, got {}", self.horizon)));
        }
        let w = self.warmup_time();
        if !(w >= 0.0 && w < self.horizon) {
            return Err(Error::SimConfig(format!("warmup must be in [0, horizon), got {w}")));
        }
        if self.replications == 0 {
            return Err(Error::SimConfig("need at least one replication".into()));
        }
        Ok(())
    }

    pub fn all_exponential(&self) -> bool {
        self.interarrival.is_exponential() && self.service.is_exponential() && self.setup.is_exponential()
    }

    fn samplers(&self, p: &SystemParams) -> Result<Samplers> {
        Ok(Samplers {
            interarrival: DistributionSpec::new(self.interarrival, 1.0 / p.lambda())?.sampler(),
            service: DistributionSpec::new(self.service, 1.0 / p.mu())?.sampler(),
            setup: DistributionSpec::new(self.setup, 1.0 / p.alpha())?.sampler(),
        })
    }
}

/// Point estimate with a 95% Student-t half-width over replications
/// (`None` with a single replication).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: Option<f64>,
}

impl Estimate {
    pub fn covers(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width.unwrap_or(0.0).max(COVERAGE_FLOOR)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub params: SystemParams,
    pub config: SimConfig,
    #[serde(rename = "L")]
    pub l: Estimate,
    #[serde(rename = "W")]
    pub w: Estimate,
    #[serde(rename = "Wq")]
    pub wq: Estimate,
    #[serde(rename = "Pb")]
    pub pb: Estimate,
    #[serde(rename = "S")]
    pub s: Estimate,
    /// Totals over all replications, after warm-up.
    pub totals: ReplicationStats,
    pub replications: Vec<ReplicationStats>,
}

impl SimulationResult {
    pub fn get(&self, metric: Metric) -> Estimate {
        match metric {
            Metric::L => self.l,
            Metric::W => self.w,
            Metric::Wq => self.wq,
            Metric::Pb => self.pb,
            Metric::S => self.s,
        }
    }
}

/// One replication on its own RNG stream.
pub fn simulate_once(params: &SystemParams, config: &SimConfig, replication: u64) -> Result<ReplicationStats> {
    config.validate()?;
    let samplers = config.samplers(params)?;
    Ok(run_replication(params, config, &samplers, replication))
}

fn run_replication(params: &SystemParams, config: &SimConfig, samplers: &Samplers, replication: u64) -> ReplicationStats {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(replication);
    Engine::new(params, samplers, config.warmup_time(), config.horizon, rng).run()
}

/// Runs `config.replications` independent replications in parallel.
/// Results depend only on the seed, not on thread scheduling.
pub fn simulate(params: &SystemParams, config: &SimConfig) -> Result<SimulationResult> {
    config.validate()?;
    let samplers = config.samplers(params)?;
    let reps: Vec<ReplicationStats> = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(params, config, &samplers, r))
        .collect();

    let mut totals = ReplicationStats::default();
    for r in &reps {
        totals.merge(r);
    }
    // Point estimates are ratios of pooled totals; the spread across
    // replications sets the interval width.
    let est = |pooled: f64, per_rep: fn(&ReplicationStats) -> f64| Estimate {
        mean: pooled,
        half_width: half_width(&reps.iter().map(per_rep).collect::<Vec<_>>()),
    };
    Ok(SimulationResult {
        params: *params,
        config: *config,
        l: est(totals.l(), ReplicationStats::l),
        w: est(totals.w(), ReplicationStats::w),
        wq: est(totals.wq(), ReplicationStats::wq),
        pb: est(totals.pb(), ReplicationStats::pb),
        s: est(totals.s(), ReplicationStats::s),
        totals,
        replications: reps,
    })
}

fn half_width(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).ok()?.inverse_cdf(0.975);
    Some(t * (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: Metric,
    pub analytical: f64,
    pub simulated: f64,
    pub half_width: Option<f64>,
    pub abs_gap: f64,
    /// Gap relative to the analytical value; `None` when that is 0.
    pub rel_gap: Option<f64>,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Only with all-exponential distributions is the analytical value the
    /// exact target; otherwise the rows are informative.
    pub exponential: bool,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn all_covered(&self) -> bool {
        self.rows.iter().all(|r| r.covered)
    }
}

pub fn compare(params: &SystemParams, metrics: &PerformanceMetrics, sim: &SimulationResult) -> Result<Comparison> {
    if *params != sim.params {
        return Err(Error::Mismatch(format!(
            "simulation ran with {:?}, analysis with {:?}",
            sim.params.raw(),
            params.raw()
        )));
    }
    let rows = Metric::ALL
        .iter()
        .map(|&metric| {
            let a = metrics.get(metric);
            let e = sim.get(metric);
            let gap = (e.mean - a).abs();
            ComparisonRow {
                metric,
                analytical: a,
                simulated: e.mean,
                half_width: e.half_width,
                abs_gap: gap,
                rel_gap: (a != 0.0).then(|| gap / a.abs()),
                covered: e.covers(a),
            }
        })
        .collect();
    Ok(Comparison {
        exponential: sim.config.all_exponential(),
        rows,
    })
}
