//! Choosing the number of dynamic instances `k`.
//!
//! The trade-off is `C = w1 * Wq + w2 * S` subject to `Wq < Wq'`. Two
//! selectors are provided over a per-`k` table of solved metrics:
//!
//! * [`KScan::threshold_walk`] walks `k = 0, 1, ...` and stops at the first `k`
//!   where the normalized cost-to-delay ratio `(S / S_bar) / (Wq / Wq_bar)`
//!   reaches `delta = w2 / w1`.
//! * [`KScan::argmin`] evaluates `C` for every `k` and returns the feasible
//!   minimizer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParamError, Result};
use crate::metrics::PerformanceMetrics;
use crate::params::SystemParams;
use crate::solver::solve;

/// [`SystemParams`] with `k` left open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseParams {
    template: SystemParams,
}

impl BaseParams {
    pub fn new(lambda: f64, mu: f64, alpha: f64, n0: usize, capacity: usize) -> Result<Self, ParamError> {
        Ok(BaseParams {
            template: SystemParams::new(lambda, mu, alpha, n0, 0, capacity)?,
        })
    }

    /// Largest admissible `k`, `K - n0`.
    pub fn k_max(&self) -> usize {
        self.template.capacity() - self.template.n0()
    }

    pub fn with_k(&self, k: usize) -> Result<SystemParams, ParamError> {
        self.template.with_k(k)
    }

    pub fn lambda(&self) -> f64 {
        self.template.lambda()
    }
}

impl From<SystemParams> for BaseParams {
    fn from(p: SystemParams) -> Self {
        BaseParams {
            template: p.with_k(0).expect("k = 0 keeps K >= N"),
        }
    }
}

/// Linear weights over every computed metric. `wq` and `s` are the two
/// terms of the standard trade-off; the rest default to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub wq: f64,
    pub s: f64,
    pub pb: f64,
    pub l: f64,
    pub w: f64,
}

impl CostWeights {
    pub fn evaluate(&self, m: &PerformanceMetrics) -> f64 {
        self.wq * m.wq + self.s * m.s + self.pb * m.pb + self.l * m.l + self.w * m.w
    }
}

/// Weights, ratio, normalizers and latency bound for the selectors. Every
/// field is optional on the wire; each selector checks what it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSpec {
    /// Weight on `Wq`.
    pub w1: Option<f64>,
    /// Weight on `S`.
    pub w2: Option<f64>,
    /// `w2 / w1`; derived from the weights when absent.
    pub delta: Option<f64>,
    pub s_bar: Option<f64>,
    pub wq_bar: Option<f64>,
    /// Upper bound on `Wq`; unbounded when absent.
    pub wq_limit: Option<f64>,
    pub w_pb: Option<f64>,
    pub w_l: Option<f64>,
    pub w_w: Option<f64>,
}

fn non_negative(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if x.is_nan() || x < 0.0 => Err(Error::Cost(format!("{name} must be >= 0, got {x}"))),
        _ => Ok(()),
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<f64> {
    match v {
        Some(x) if x > 0.0 => Ok(x),
        Some(x) => Err(Error::Cost(format!("{name} must be > 0, got {x}"))),
        None => Err(Error::Cost(format!("{name} is required"))),
    }
}

impl CostSpec {
    pub fn from_weights(w1: f64, w2: f64) -> Self {
        CostSpec {
            w1: Some(w1),
            w2: Some(w2),
            ..Default::default()
        }
    }

    pub fn from_delta(delta: f64, s_bar: f64, wq_bar: f64) -> Self {
        CostSpec {
            delta: Some(delta),
            s_bar: Some(s_bar),
            wq_bar: Some(wq_bar),
            ..Default::default()
        }
    }

    pub fn with_wq_limit(mut self, limit: f64) -> Self {
        self.wq_limit = Some(limit);
        self
    }

    pub fn with_normalizers(mut self, s_bar: f64, wq_bar: f64) -> Self {
        self.s_bar = Some(s_bar);
        self.wq_bar = Some(wq_bar);
        self
    }

    pub fn weights(&self) -> CostWeights {
        CostWeights {
            wq: self.w1.unwrap_or(0.0),
            s: self.w2.unwrap_or(0.0),
            pb: self.w_pb.unwrap_or(0.0),
            l: self.w_l.unwrap_or(0.0),
            w: self.w_w.unwrap_or(0.0),
        }
    }

    pub fn has_weights(&self) -> bool {
        self.w1.is_some() || self.w2.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w1", self.w1),
            ("w2", self.w2),
            ("delta", self.delta),
            ("w_pb", self.w_pb),
            ("w_l", self.w_l),
            ("w_w", self.w_w),
        ] {
            non_negative(name, v)?;
        }
        for (name, v) in [("s_bar", self.s_bar), ("wq_bar", self.wq_bar), ("wq_limit", self.wq_limit)] {
            if v.is_some() {
                positive(name, v)?;
            }
        }
        if let (Some(d), Some(_), Some(_)) = (self.delta, self.w1, self.w2) {
            let derived = self.derived_delta()?;
            if (d - derived).abs() > 1e-12 * d.abs().max(1.0) && !(d.is_infinite() && derived.is_infinite()) {
                return Err(Error::Cost(format!("delta = {d} disagrees with w2 / w1 = {derived}")));
            }
        }
        Ok(())
    }

    fn derived_delta(&self) -> Result<f64> {
        let (w1, w2) = (self.w1.unwrap_or(0.0), self.w2.unwrap_or(0.0));
        if w1 > 0.0 {
            Ok(w2 / w1)
        } else if w2 > 0.0 {
            Ok(f64::INFINITY)
        } else {
            Err(Error::Cost("w1 and w2 are both zero; delta is undefined".into()))
        }
    }

    /// `delta`, explicit or derived from the weights (`+inf` when `w1 = 0`).
    pub fn delta(&self) -> Result<f64> {
        self.validate()?;
        match self.delta {
            Some(d) => Ok(d),
            None if self.has_weights() => self.derived_delta(),
            None => Err(Error::Cost("delta or w1/w2 is required".into())),
        }
    }

    pub fn limit(&self) -> f64 {
        self.wq_limit.unwrap_or(f64::INFINITY)
    }
}

/// `C` under the spec's weights (missing weights count as zero).
pub fn cost(metrics: &PerformanceMetrics, spec: &CostSpec) -> f64 {
    spec.weights().evaluate(metrics)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: usize,
    #[serde(rename = "Wq")]
    pub wq: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "C")]
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub k_op: usize,
    pub cost: Option<f64>,
    pub metrics: PerformanceMetrics,
    pub feasible: bool,
    pub scan: Vec<ScanRow>,
}

/// Lazily filled table of metrics for `k = 0..=K - n0`.
#[derive(Debug, Clone)]
pub struct KScan {
    base: BaseParams,
    table: Vec<Option<PerformanceMetrics>>,
    solver_calls: usize,
}

impl KScan {
    pub fn new(base: BaseParams) -> Self {
        KScan {
            base,
            table: vec![None; base.k_max() + 1],
            solver_calls: 0,
        }
    }

    pub fn base(&self) -> &BaseParams {
        &self.base
    }

    /// Number of model solves performed so far.
    pub fn solver_calls(&self) -> usize {
        self.solver_calls
    }

    pub fn metrics_at(&mut self, k: usize) -> Result<PerformanceMetrics> {
        if let Some(m) = self.table.get(k).copied().flatten() {
            return Ok(m);
        }
        let m = solve(&self.base.with_k(k)?)?.metrics;
        self.table[k] = Some(m);
        self.solver_calls += 1;
        Ok(m)
    }

    /// Solves every missing `k`, in parallel.
    pub fn fill(&mut self) -> Result<()> {
        let missing: Vec<usize> = (0..self.table.len()).filter(|&k| self.table[k].is_none()).collect();
        let base = self.base;
        let solved: Vec<(usize, Result<PerformanceMetrics>)> = missing
            .par_iter()
            .map(|&k| (k, base.with_k(k).map_err(Error::from).and_then(|p| Ok(solve(&p)?.metrics))))
            .collect();
        for (k, m) in solved {
            self.table[k] = Some(m?);
            self.solver_calls += 1;
        }
        Ok(())
    }

    /// Rows for every `k` solved so far, ascending.
    pub fn rows(&self, spec: Option<&CostSpec>) -> Vec<ScanRow> {
        self.table
            .iter()
            .enumerate()
            .filter_map(|(k, m)| {
                m.map(|m| ScanRow {
                    k,
                    wq: m.wq,
                    s: m.s,
                    cost: spec.filter(|s| s.has_weights()).map(|s| cost(&m, s)),
                })
            })
            .collect()
    }

    /// Threshold-ratio selection. Needs `delta` (or weights), `s_bar` and
    /// `wq_bar`.
    pub fn threshold_walk(&mut self, spec: &CostSpec) -> Result<usize> {
        let delta = spec.delta()?;
        let s_bar = positive("s_bar", spec.s_bar)?;
        let wq_bar = positive("wq_bar", spec.wq_bar)?;
        let k_max = self.base.k_max();
        for k in 0..=k_max {
            let m = self.metrics_at(k)?;
            let ratio = if m.wq > 0.0 {
                (m.s / s_bar) / (m.wq / wq_bar)
            } else {
                f64::INFINITY
            };
            if ratio >= delta {
                return Ok(k);
            }
        }
        Ok(k_max)
    }

    /// Exhaustive constrained minimization of `C` over all `k`.
    pub fn argmin(&mut self, spec: &CostSpec) -> Result<OptimizationResult> {
        spec.validate()?;
        if !spec.has_weights() {
            return Err(Error::Cost("w1/w2 are required".into()));
        }
        self.fill()?;
        let limit = spec.limit();
        let table: Vec<PerformanceMetrics> = self.table.iter().map(|m| m.expect("filled")).collect();

        let mut best: Option<(usize, f64)> = None;
        for (k, m) in table.iter().enumerate() {
            if m.wq < limit {
                let c = cost(m, spec);
                if best.is_none_or(|(_, b)| c < b) {
                    best = Some((k, c));
                }
            }
        }
        let (k_op, feasible) = match best {
            Some((k, _)) => (k, true),
            None => {
                let k = (0..table.len())
                    .min_by(|&a, &b| table[a].wq.total_cmp(&table[b].wq).then(a.cmp(&b)))
                    .expect("k = 0 always exists");
                (k, false)
            }
        };
        Ok(OptimizationResult {
            k_op,
            cost: Some(cost(&table[k_op], spec)),
            metrics: table[k_op],
            feasible,
            scan: self.rows(Some(spec)),
        })
    }

    /// Wraps a `k` picked by [`threshold_walk`](Self::threshold_walk) as a result,
    /// with the rows solved so far.
    pub fn result_for(&mut self, k_op: usize, spec: &CostSpec) -> Result<OptimizationResult> {
        let metrics = self.metrics_at(k_op)?;
        Ok(OptimizationResult {
            k_op,
            cost: spec.has_weights().then(|| cost(&metrics, spec)),
            metrics,
            feasible: metrics.wq < spec.limit(),
            scan: self.rows(Some(spec)),
        })
    }
}

pub fn select_k_threshold(base: BaseParams, spec: &CostSpec) -> Result<usize> {
    KScan::new(base).threshold_walk(spec)
}

pub fn argmin_k(base: BaseParams, spec: &CostSpec) -> Result<OptimizationResult> {
    KScan::new(base).argmin(spec)
}
