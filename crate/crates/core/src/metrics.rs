use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{setup_count_unchecked, StationaryDistribution};

/// Long-run performance of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMetrics {
    /// Mean number of jobs in the system.
    #[serde(rename = "L")]
    pub l: f64,
    /// Mean response time of an accepted job.
    #[serde(rename = "W")]
    pub w: f64,
    /// Mean queueing delay of an accepted job.
    #[serde(rename = "Wq")]
    pub wq: f64,
    /// Fraction of arrivals rejected at a full system.
    #[serde(rename = "Pb")]
    pub pb: f64,
    /// Mean number of dynamic instances that are active or in setup.
    #[serde(rename = "S")]
    pub s: f64,
}

impl PerformanceMetrics {
    pub fn from_distribution(dist: &StationaryDistribution) -> Result<Self> {
        let ss = dist.state_space();
        let p = ss.params();
        let pi = dist.as_slice();
        let mut l = 0.0;
        let mut lq = 0.0;
        let mut s = 0.0;
        let mut pb = 0.0;
        for (idx, (i, j)) in ss.states().enumerate() {
            l += pi[idx] * j as f64;
            lq += pi[idx] * j.saturating_sub(p.servers_at(i)) as f64;
            s += pi[idx] * (i + setup_count_unchecked(p, i, j)) as f64;
            if j == p.capacity() {
                pb += pi[idx];
            }
        }
        let accepted = p.lambda() * (1.0 - pb);
        if accepted <= 0.0 {
            return Err(Error::AllBlocked);
        }
        // Equal to L / accepted - 1/mu in steady state (busy servers =
        // accepted / mu), but without cancellation when the queue is tiny.
        let wq = lq / accepted;
        let w = wq + 1.0 / p.mu();
        Ok(PerformanceMetrics {
            l,
            w,
            wq,
            pb: pb.clamp(0.0, 1.0),
            s,
        })
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::L => self.l,
            Metric::W => self.w,
            Metric::Wq => self.wq,
            Metric::Pb => self.pb,
            Metric::S => self.s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    L,
    W,
    Wq,
    Pb,
    S,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::L, Metric::W, Metric::Wq, Metric::Pb, Metric::S];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::L => "L",
            Metric::W => "W",
            Metric::Wq => "Wq",
            Metric::Pb => "Pb",
            Metric::S => "S",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{StateSpace, SystemParams};

    #[test]
    fn two_state_chain_by_hand() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 1, 0, 1).unwrap();
        let d = StationaryDistribution::from_unnormalized(StateSpace::new(p), vec![1.0, 1.0]).unwrap();
        let m = PerformanceMetrics::from_distribution(&d).unwrap();
        assert_eq!(m.l, 0.5);
        assert_eq!(m.pb, 0.5);
        assert_eq!(m.w, 1.0);
        assert_eq!(m.wq, 0.0);
        assert_eq!(m.s, 0.0);
    }

    #[test]
    fn fully_blocked_distribution_is_rejected() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 1, 0, 1).unwrap();
        let d = StationaryDistribution::from_unnormalized(StateSpace::new(p), vec![0.0, 1.0]).unwrap();
        assert!(matches!(PerformanceMetrics::from_distribution(&d), Err(Error::AllBlocked)));
    }

    #[test]
    fn setup_instances_count_toward_cost() {
        // All mass on (0, K) of n0=2, k=2, K=7: both instances are in setup.
        let p = SystemParams::new(1.0, 1.0, 0.5, 2, 2, 7).unwrap();
        let ss = StateSpace::new(p);
        let mut mass = vec![0.0; ss.total_states()];
        mass[ss.index(0, 7).unwrap()] = 1.0;
        mass[ss.index(1, 4).unwrap()] = 1.0;
        let d = StationaryDistribution::from_unnormalized(ss, mass).unwrap();
        let m = PerformanceMetrics::from_distribution(&d).unwrap();
        // (0,7): 2 in setup; (1,4): 1 active + 1 in setup.
        assert_eq!(m.s, 2.0);
        assert_eq!(m.pb, 0.5);
        assert_eq!(m.l, 5.5);
    }
}
