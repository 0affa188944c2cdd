//! State space of the `(active instances, jobs in system)` Markov chain.
//!
//! Level `i` holds states `(i, j)` with `n_i <= j <= K` (level 0 starts at
//! `j = 0`). States are stored level-major in one flat vector; `level_offsets`
//! gives the flat index of the first state of each level.

use crate::error::{Error, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    params: SystemParams,
    level_offsets: Vec<usize>,
    total_states: usize,
}

/// One outgoing arc of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub to: (usize, usize),
    pub rate: f64,
    pub kind: TransitionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    Arrival,
    Departure,
    SetupComplete,
}

impl StateSpace {
    pub fn new(params: SystemParams) -> Self {
        let levels = params.k() + 1;
        let mut level_offsets = Vec::with_capacity(levels);
        let mut next = 0;
        for i in 0..levels {
            level_offsets.push(next);
            next += params.capacity() - Self::first_jobs(&params, i) + 1;
        }
        StateSpace {
            params,
            level_offsets,
            total_states: next,
        }
    }

    fn first_jobs(params: &SystemParams, level: usize) -> usize {
        if level == 0 {
            0
        } else {
            params.servers_at(level)
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn total_states(&self) -> usize {
        self.total_states
    }

    pub fn levels(&self) -> usize {
        self.params.k() + 1
    }

    pub fn level_offsets(&self) -> &[usize] {
        &self.level_offsets
    }

    /// Smallest job count present at `level`.
    pub fn min_jobs(&self, level: usize) -> usize {
        Self::first_jobs(&self.params, level)
    }

    /// Flat index range of `level`.
    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        let start = self.level_offsets[level];
        let end = self
            .level_offsets
            .get(level + 1)
            .copied()
            .unwrap_or(self.total_states);
        start..end
    }

    pub fn contains(&self, level: usize, jobs: usize) -> bool {
        level <= self.params.k() && jobs <= self.params.capacity() && jobs >= self.min_jobs(level)
    }

    pub fn index(&self, level: usize, jobs: usize) -> Result<usize> {
        if !self.contains(level, jobs) {
            return Err(Error::OutOfDomain { level, jobs });
        }
        Ok(self.level_offsets[level] + jobs - self.min_jobs(level))
    }

    pub fn decode(&self, index: usize) -> Option<(usize, usize)> {
        if index >= self.total_states {
            return None;
        }
        let level = self.level_offsets.partition_point(|&off| off <= index) - 1;
        Some((level, index - self.level_offsets[level] + self.min_jobs(level)))
    }

    /// All states in flat order.
    pub fn states(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.levels()).flat_map(move |i| (self.min_jobs(i)..=self.params.capacity()).map(move |j| (i, j)))
    }

    /// Instances in setup at `(level, jobs)`.
    pub fn setup_count(&self, level: usize, jobs: usize) -> Result<usize> {
        if !self.contains(level, jobs) {
            return Err(Error::OutOfDomain { level, jobs });
        }
        Ok(setup_count_unchecked(&self.params, level, jobs))
    }

    /// Outgoing transitions of `(level, jobs)`.
    pub fn transitions(&self, level: usize, jobs: usize) -> Result<Vec<Transition>> {
        if !self.contains(level, jobs) {
            return Err(Error::OutOfDomain { level, jobs });
        }
        let p = &self.params;
        let mut out = Vec::with_capacity(3);
        if jobs < p.capacity() {
            out.push(Transition {
                to: (level, jobs + 1),
                rate: p.lambda(),
                kind: TransitionKind::Arrival,
            });
        }
        if jobs > 0 {
            let n = p.servers_at(level);
            let busy = jobs.min(n);
            // Dropping below n_i powers one instance off.
            let to_level = if level > 0 && jobs == n { level - 1 } else { level };
            out.push(Transition {
                to: (to_level, jobs - 1),
                rate: busy as f64 * p.mu(),
                kind: TransitionKind::Departure,
            });
        }
        let setups = setup_count_unchecked(p, level, jobs);
        if setups > 0 {
            out.push(Transition {
                to: (level + 1, jobs),
                rate: setups as f64 * p.alpha(),
                kind: TransitionKind::SetupComplete,
            });
        }
        Ok(out)
    }
}

pub(crate) fn setup_count_unchecked(p: &SystemParams, level: usize, jobs: usize) -> usize {
    let n = p.servers_at(level);
    jobs.saturating_sub(n).min(p.servers() - n)
}

/// Normalized stationary probabilities, one per state in flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    state_space: StateSpace,
    pi: Vec<f64>,
}

impl StationaryDistribution {
    /// Normalizes `mass` to sum to one. Entries must be finite and
    /// non-negative with a positive total.
    pub fn from_unnormalized(state_space: StateSpace, mut mass: Vec<f64>) -> Result<Self> {
        assert_eq!(mass.len(), state_space.total_states());
        if let Some(pos) = mass.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            let (level, jobs) = state_space.decode(pos).unwrap();
            return Err(Error::NumericalFault {
                level,
                jobs,
                detail: format!("invalid probability mass {}", mass[pos]),
            });
        }
        let total: f64 = mass.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::NumericalFault {
                level: 0,
                jobs: 0,
                detail: format!("normalizing constant {total}"),
            });
        }
        mass.iter_mut().for_each(|m| *m /= total);
        Ok(StationaryDistribution {
            state_space,
            pi: mass,
        })
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    pub fn params(&self) -> &SystemParams {
        self.state_space.params()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }

    pub fn level(&self, level: usize) -> &[f64] {
        &self.pi[self.state_space.level_range(level)]
    }

    pub fn get(&self, level: usize, jobs: usize) -> Result<f64> {
        Ok(self.pi[self.state_space.index(level, jobs)?])
    }

    /// Probability mass with `level` instances active.
    pub fn level_mass(&self, level: usize) -> f64 {
        self.level(level).iter().sum()
    }

    /// Worst per-state global balance violation, `|in - out| / max(in, out)`.
    pub fn max_balance_residual(&self) -> f64 {
        let ss = &self.state_space;
        let mut inflow = vec![0.0; ss.total_states()];
        let mut outflow = vec![0.0; ss.total_states()];
        for (idx, (i, j)) in ss.states().enumerate() {
            for t in ss.transitions(i, j).expect("enumerated state") {
                let flow = self.pi[idx] * t.rate;
                outflow[idx] += flow;
                inflow[ss.index(t.to.0, t.to.1).expect("valid target")] += flow;
            }
        }
        inflow
            .iter()
            .zip(&outflow)
            .map(|(&a, &b)| {
                let scale = a.max(b);
                if scale < 1e-300 {
                    0.0
                } else {
                    (a - b).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(n0: usize, k: usize, cap: usize) -> StateSpace {
        StateSpace::new(SystemParams::new(1.0, 1.0, 0.5, n0, k, cap).unwrap())
    }

    #[test]
    fn small_chain_sizes() {
        let s = space(2, 2, 7);
        assert_eq!(s.total_states(), 17);
        assert_eq!(s.level_range(0).len(), 8);
        assert_eq!(s.level_range(1).len(), 5);
        assert_eq!(s.level_range(2).len(), 4);
        assert_eq!(space(5, 0, 10).total_states(), 11);
    }

    #[test]
    fn default_scale_size_matches_enumeration() {
        let s = space(110, 60, 250);
        let closed = 251 + (1..=60).map(|i| 141 - i).sum::<usize>();
        let enumerated = (0..=60usize)
            .flat_map(|i| (0..=250usize).map(move |j| (i, j)))
            .filter(|&(i, j)| i == 0 || j >= 110 + i)
            .count();
        assert_eq!(closed, 6881);
        assert_eq!(enumerated, 6881);
        assert_eq!(s.total_states(), 6881);
    }

    #[test]
    fn setup_counts() {
        let s = space(2, 2, 7);
        assert_eq!(s.setup_count(0, 7).unwrap(), 2);
        assert_eq!(s.setup_count(1, 5).unwrap(), 1);
        for i in 0..=2 {
            let n = 2 + i;
            assert_eq!(s.setup_count(i, n).unwrap(), 0);
            assert_eq!(s.setup_count(i, 7).unwrap(), 4 - n);
        }
        assert!(matches!(s.setup_count(1, 2), Err(Error::OutOfDomain { .. })));
        assert!(s.setup_count(3, 7).is_err());
        assert!(s.setup_count(0, 8).is_err());
    }

    #[test]
    fn index_rejects_non_states() {
        let s = space(2, 2, 7);
        assert!(s.index(1, 2).is_err());
        assert!(s.index(2, 3).is_err());
        assert!(s.index(0, 8).is_err());
        assert_eq!(s.decode(17), None);
    }

    #[test]
    fn small_chain_arcs() {
        // Out-arcs of every state of the n0=2, k=2, K=7 chain, written out by hand.
        use TransitionKind::*;
        let s = space(2, 2, 7);
        let arcs = |i, j| -> Vec<(TransitionKind, (usize, usize), f64)> {
            s.transitions(i, j)
                .unwrap()
                .into_iter()
                .map(|t| (t.kind, t.to, t.rate))
                .collect()
        };
        assert_eq!(arcs(0, 0), vec![(Arrival, (0, 1), 1.0)]);
        assert_eq!(arcs(0, 1), vec![(Arrival, (0, 2), 1.0), (Departure, (0, 0), 1.0)]);
        assert_eq!(arcs(0, 2), vec![(Arrival, (0, 3), 1.0), (Departure, (0, 1), 2.0)]);
        assert_eq!(
            arcs(0, 3),
            vec![(Arrival, (0, 4), 1.0), (Departure, (0, 2), 2.0), (SetupComplete, (1, 3), 0.5)]
        );
        for j in 4..7 {
            assert_eq!(
                arcs(0, j),
                vec![(Arrival, (0, j + 1), 1.0), (Departure, (0, j - 1), 2.0), (SetupComplete, (1, j), 1.0)]
            );
        }
        assert_eq!(arcs(0, 7), vec![(Departure, (0, 6), 2.0), (SetupComplete, (1, 7), 1.0)]);
        assert_eq!(arcs(1, 3), vec![(Arrival, (1, 4), 1.0), (Departure, (0, 2), 3.0)]);
        for j in 4..7 {
            assert_eq!(
                arcs(1, j),
                vec![(Arrival, (1, j + 1), 1.0), (Departure, (1, j - 1), 3.0), (SetupComplete, (2, j), 0.5)]
            );
        }
        assert_eq!(arcs(1, 7), vec![(Departure, (1, 6), 3.0), (SetupComplete, (2, 7), 0.5)]);
        assert_eq!(arcs(2, 4), vec![(Arrival, (2, 5), 1.0), (Departure, (1, 3), 4.0)]);
        assert_eq!(arcs(2, 5), vec![(Arrival, (2, 6), 1.0), (Departure, (2, 4), 4.0)]);
        assert_eq!(arcs(2, 7), vec![(Departure, (2, 6), 4.0)]);
        let total: usize = s.states().map(|(i, j)| s.transitions(i, j).unwrap().len()).sum();
        assert_eq!(total, 1 + 2 * 2 + 3 * 4 + 2 + 2 + 3 * 3 + 2 + 2 * 3 + 1);
    }

    proptest! {
        #[test]
        fn flat_index_is_a_bijection(n0 in 1usize..8, k in 0usize..8, extra in 0usize..20) {
            let s = space(n0, k, n0 + k + extra);
            let mut seen = 0;
            for (idx, (i, j)) in s.states().enumerate() {
                prop_assert_eq!(s.index(i, j).unwrap(), idx);
                prop_assert_eq!(s.decode(idx), Some((i, j)));
                seen += 1;
            }
            prop_assert_eq!(seen, s.total_states());
        }

        #[test]
        fn total_states_matches_brute_force(n0 in 1usize..20, k in 0usize..20, extra in 0usize..20) {
            let cap = n0 + k + extra;
            prop_assume!(cap <= 50);
            let s = space(n0, k, cap);
            let brute = (0..=k)
                .flat_map(|i| (0..=cap).map(move |j| (i, j)))
                .filter(|&(i, j)| i == 0 || j >= n0 + i)
                .count();
            prop_assert_eq!(s.total_states(), brute);
            for i in 0..=k {
                prop_assert_eq!(s.setup_count(i, cap).unwrap(), n0 + k - (n0 + i));
                let first = if i == 0 { n0 } else { n0 + i };
                prop_assert_eq!(s.setup_count(i, first).unwrap(), 0);
            }
        }
    }
}
