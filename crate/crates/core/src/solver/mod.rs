//! Exact stationary distribution by level-by-level recursion.
//!
//! Level 0 is a pure product form `pi[0][j] = b[j] * pi[0][j-1]`. Each
//! higher level `i` is seeded by a cut equation between levels `i-1` and `i`
//! and then filled with `pi[i][j] = a[j] + b[j] * pi[i][j-1]`, where the
//! coefficients come from a backward sweep over the balance equations of
//! that level. Work is linear in the number of states.

mod dense;

pub use dense::{dense_oracle, DENSE_STATE_LIMIT};

use crate::error::{Error, Result};
use crate::metrics::PerformanceMetrics;
use crate::params::SystemParams;
use crate::state::{setup_count_unchecked, StateSpace, StationaryDistribution};

/// Unnormalized masses above this are rescaled by [`RESCALE_FACTOR`].
pub const RESCALE_THRESHOLD: f64 = 1e250;
pub const RESCALE_FACTOR: f64 = 1e-250;

/// Relative slack allowed when checking coefficient bounds.
const BOUND_SLACK: f64 = 1e-12;

/// Recursion coefficients of one level.
///
/// Entry `t` of `a` and `b` belongs to job count `first_jobs + t`. Level 0
/// has `first_jobs = 1` and no `a` terms (they are all zero).
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionCoefficients {
    pub level: usize,
    pub first_jobs: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl RecursionCoefficients {
    pub fn a(&self, jobs: usize) -> f64 {
        if self.a.is_empty() {
            0.0
        } else {
            self.a[jobs - self.first_jobs]
        }
    }

    pub fn b(&self, jobs: usize) -> f64 {
        self.b[jobs - self.first_jobs]
    }

    pub fn jobs(&self) -> std::ops::Range<usize> {
        self.first_jobs..self.first_jobs + self.b.len()
    }

    /// Checks positivity of every coefficient and the upper bound
    /// `b[j] <= lambda / (n_i mu + setups(i, j) alpha)`. On the top level
    /// there are no setups and the bound is attained at every `j`.
    pub fn verify_bounds(&self, params: &SystemParams) -> Result<()> {
        let fault = |jobs: usize, detail: String| Error::NumericalFault {
            level: self.level,
            jobs,
            detail,
        };
        let n = params.servers_at(self.level);
        for j in self.jobs() {
            let b = self.b(j);
            if !(b > 0.0 && b.is_finite()) {
                return Err(fault(j, format!("b = {b} is not positive")));
            }
            if self.level > 0 && self.a(j) < 0.0 {
                return Err(fault(j, format!("a = {} is negative", self.a(j))));
            }
            if j <= n {
                continue;
            }
            let setups = setup_count_unchecked(params, self.level, j) as f64;
            let bound = params.lambda() / (n as f64 * params.mu() + setups * params.alpha());
            if b > bound * (1.0 + BOUND_SLACK) {
                return Err(fault(j, format!("b = {b} exceeds bound {bound}")));
            }
        }
        Ok(())
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub distribution: StationaryDistribution,
    pub metrics: PerformanceMetrics,
    pub rescale_events: usize,
    pub max_balance_residual: f64,
    /// Floating-point operations spent in the recursion and normalization.
    pub op_count: u64,
}

fn positive_denominator(den: f64, level: usize, jobs: usize) -> Result<f64> {
    if den > 0.0 && den.is_finite() {
        Ok(den)
    } else {
        Err(Error::NumericalFault {
            level,
            jobs,
            detail: format!("denominator {den}"),
        })
    }
}

/// Level-0 coefficients `b[j]`, `j = 1..=K`.
pub fn level0_coefficients(params: &SystemParams) -> Result<RecursionCoefficients> {
    level0_counted(params, &mut 0)
}

fn level0_counted(params: &SystemParams, ops: &mut u64) -> Result<RecursionCoefficients> {
    let (lambda, mu, alpha) = (params.lambda(), params.mu(), params.alpha());
    let n0 = params.n0();
    let cap = params.capacity();
    let mut b = vec![0.0; cap];
    for j in 1..=n0.min(cap) {
        b[j - 1] = lambda / (j as f64 * mu);
        *ops += 2;
    }
    if cap > n0 && params.k() == 0 {
        // Level 0 is also the top level; see `level_counted`.
        let b_top = lambda / (n0 as f64 * mu);
        b[n0..].iter_mut().for_each(|b| *b = b_top);
        *ops += 2 + (cap - n0) as u64;
    } else if cap > n0 {
        let top_setups = (params.servers() - n0) as f64;
        b[cap - 1] = lambda / positive_denominator(n0 as f64 * mu + top_setups * alpha, 0, cap)?;
        *ops += 4;
        for j in (n0 + 1..cap).rev() {
            let setups = setup_count_unchecked(params, 0, j) as f64;
            let den = lambda + n0 as f64 * mu + setups * alpha - n0 as f64 * mu * b[j];
            b[j - 1] = lambda / positive_denominator(den, 0, j)?;
            *ops += 9;
        }
    }
    let coeffs = RecursionCoefficients {
        level: 0,
        first_jobs: 1,
        a: Vec::new(),
        b,
    };
    coeffs.verify_bounds(params)?;
    Ok(coeffs)
}

/// Level-0 coefficients and unnormalized masses with `pi[0][0] = 1`.
///
/// No overflow guard is applied; use [`solve`] for large systems.
pub fn solve_level0(params: &SystemParams) -> Result<(RecursionCoefficients, Vec<f64>)> {
    let coeffs = level0_coefficients(params)?;
    let mut mass = Vec::with_capacity(params.capacity() + 1);
    mass.push(1.0);
    for j in 1..=params.capacity() {
        mass.push(coeffs.b(j) * mass[j - 1]);
    }
    Ok((coeffs, mass))
}

/// Unnormalized mass of `(level + 1, n_{level+1})` from the flow balance
/// across the cut between levels `0..=level` and the levels above.
///
/// `level_mass` holds `pi[level][j]` for `j` from the level's first state up
/// to `K`.
pub fn boundary_mass(params: &SystemParams, level: usize, level_mass: &[f64]) -> f64 {
    boundary_counted(params, level, level_mass, &mut 0)
}

fn boundary_counted(params: &SystemParams, level: usize, level_mass: &[f64], ops: &mut u64) -> f64 {
    let first = if level == 0 { 0 } else { params.servers_at(level) };
    let n = params.servers_at(level);
    let mut up_flow = 0.0;
    for j in n + 1..=params.capacity() {
        let setups = setup_count_unchecked(params, level, j) as f64;
        up_flow += setups * params.alpha() * level_mass[j - first];
        *ops += 3;
    }
    *ops += 2;
    up_flow / (params.servers_at(level + 1) as f64 * params.mu())
}

/// Backward sweep for level `level >= 1`, given the masses of the level
/// below (indexed from that level's first state).
pub fn level_coefficients(
    params: &SystemParams,
    level: usize,
    below: &[f64],
) -> Result<RecursionCoefficients> {
    level_counted(params, level, below, &mut 0)
}

fn level_counted(
    params: &SystemParams,
    level: usize,
    below: &[f64],
    ops: &mut u64,
) -> Result<RecursionCoefficients> {
    assert!(level >= 1 && level <= params.k());
    let (lambda, mu, alpha) = (params.lambda(), params.mu(), params.alpha());
    let cap = params.capacity();
    let n = params.servers_at(level);
    let below_first = if level == 1 { 0 } else { params.servers_at(level - 1) };
    let first = n + 1;
    let len = cap + 1 - first;
    let mut a = vec![0.0; len];
    let mut b = vec![0.0; len];
    let service = n as f64 * mu;

    // Setup completions feeding (level, j) from (level - 1, j).
    let inflow = |j: usize| setup_count_unchecked(params, level - 1, j) as f64 * alpha * below[j - below_first];

    // On the top level nothing is in setup and every denominator collapses
    // to n_k mu exactly, so b = lambda / (n_k mu) throughout. Evaluating the
    // general form there amplifies rounding by lambda / (n_k mu) per step.
    let top = level == params.k();
    for j in (first..=cap).rev() {
        let t = j - first;
        let setups = setup_count_unchecked(params, level, j) as f64;
        let (den, carried_a) = if top {
            (service, if j == cap { 0.0 } else { service * a[t + 1] })
        } else if j == cap {
            (service + setups * alpha, 0.0)
        } else {
            (lambda + setups * alpha + service - service * b[t + 1], service * a[t + 1])
        };
        let den = positive_denominator(den, level, j)?;
        let up = inflow(j);
        a[t] = (carried_a + up) / den;
        b[t] = lambda / den;
        *ops += 13;

        let a_bound = (carried_a + up) / (service + setups * alpha);
        if a[t] > a_bound * (1.0 + BOUND_SLACK) {
            return Err(Error::NumericalFault {
                level,
                jobs: j,
                detail: format!("a = {} exceeds bound {a_bound}", a[t]),
            });
        }
    }
    let coeffs = RecursionCoefficients {
        level,
        first_jobs: first,
        a,
        b,
    };
    coeffs.verify_bounds(params)?;
    Ok(coeffs)
}

/// Unnormalized masses of `level >= 1` from the level below and the
/// boundary mass `pi[level][n_level]`. No overflow guard is applied.
pub fn solve_level(
    params: &SystemParams,
    level: usize,
    below: &[f64],
    boundary: f64,
) -> Result<(RecursionCoefficients, Vec<f64>)> {
    let coeffs = level_coefficients(params, level, below)?;
    let mut mass = Vec::with_capacity(coeffs.b.len() + 1);
    mass.push(boundary);
    for j in coeffs.jobs() {
        let prev = *mass.last().unwrap();
        mass.push(coeffs.a(j) + coeffs.b(j) * prev);
    }
    Ok((coeffs, mass))
}

/// Runs the full recursion with overflow rescaling and normalizes.
pub fn solve(params: &SystemParams) -> Result<SolveReport> {
    run(params, None)
}

/// As [`solve`], also returning every level's coefficients.
pub fn solve_traced(params: &SystemParams) -> Result<(SolveReport, Vec<RecursionCoefficients>)> {
    let mut trace = Vec::with_capacity(params.k() + 1);
    let report = run(params, Some(&mut trace))?;
    Ok((report, trace))
}

/// Working state of one recursion: all masses computed so far, in flat order.
struct Recursion {
    mass: Vec<f64>,
    rescale_events: usize,
    ops: u64,
}

impl Recursion {
    /// Appends `value`; rescales everything computed so far if it is too
    /// large. Returns the factor applied (1.0 when nothing happened).
    fn push(&mut self, value: f64) -> f64 {
        self.mass.push(value);
        if value > RESCALE_THRESHOLD {
            self.mass.iter_mut().for_each(|m| *m *= RESCALE_FACTOR);
            self.rescale_events += 1;
            self.ops += self.mass.len() as u64;
            RESCALE_FACTOR
        } else {
            1.0
        }
    }
}

fn run(params: &SystemParams, mut trace: Option<&mut Vec<RecursionCoefficients>>) -> Result<SolveReport> {
    let space = StateSpace::new(*params);
    let mut rec = Recursion {
        mass: Vec::with_capacity(space.total_states()),
        rescale_events: 0,
        ops: 0,
    };

    let level0 = level0_counted(params, &mut rec.ops)?;
    rec.push(1.0);
    for j in 1..=params.capacity() {
        let prev = *rec.mass.last().unwrap();
        rec.push(level0.b(j) * prev);
        rec.ops += 1;
    }
    if let Some(t) = trace.as_deref_mut() {
        t.push(level0);
    }

    for level in 1..=params.k() {
        let below = &rec.mass[space.level_range(level - 1)];
        let boundary = boundary_counted(params, level - 1, below, &mut rec.ops);
        let coeffs = level_counted(params, level, below, &mut rec.ops)?;

        // a-coefficients were built from the masses as they stood; they
        // shrink along with every rescale applied during this pass.
        let mut a_scale = rec.push(boundary);
        for j in coeffs.jobs() {
            let prev = *rec.mass.last().unwrap();
            let value = coeffs.a(j) * a_scale + coeffs.b(j) * prev;
            rec.ops += 3;
            a_scale *= rec.push(value);
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(coeffs);
        }
    }
    debug_assert_eq!(rec.mass.len(), space.total_states());

    rec.ops += 2 * rec.mass.len() as u64;
    let distribution = StationaryDistribution::from_unnormalized(space, rec.mass)?;
    let metrics = PerformanceMetrics::from_distribution(&distribution)?;
    let max_balance_residual = distribution.max_balance_residual();
    Ok(SolveReport {
        distribution,
        metrics,
        rescale_events: rec.rescale_events,
        max_balance_residual,
        op_count: rec.ops,
    })
}

#[cfg(test)]
mod tests;
