use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Full configuration of the legacy-block-plus-dynamic-instances queue.
///
/// The legacy block of `n0` servers is always on. Up to `k` dynamic
/// instances are powered up one at a time as jobs queue, each needing an
/// exponential setup period with rate `alpha` before serving. `capacity` is
/// the maximum number of jobs in the system (waiting plus in service).
///
/// Instances of this type are always valid; construct them with
/// [`SystemParams::new`] or deserialize them (which validates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SystemParams {
    lambda: f64,
    mu: f64,
    alpha: f64,
    n0: usize,
    k: usize,
    capacity: usize,
}

/// Unvalidated wire form of [`SystemParams`]. Integer fields are signed so a
/// negative count gets a dedicated error rather than a parse failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub n0: i64,
    pub k: i64,
    #[serde(rename = "K")]
    pub capacity: i64,
}

fn check_rate(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositiveRate { name, value })
    }
}

impl TryFrom<RawParams> for SystemParams {
    type Error = ParamError;

    fn try_from(raw: RawParams) -> Result<Self, ParamError> {
        check_rate("lambda", raw.lambda)?;
        check_rate("mu", raw.mu)?;
        check_rate("alpha", raw.alpha)?;
        if raw.n0 < 1 {
            return Err(ParamError::EmptyLegacyBlock(raw.n0));
        }
        if raw.k < 0 {
            return Err(ParamError::NegativeInstances(raw.k));
        }
        let servers = raw.n0 + raw.k;
        if raw.capacity < servers {
            return Err(ParamError::CapacityBelowServers {
                capacity: raw.capacity,
                servers,
            });
        }
        Ok(SystemParams {
            lambda: raw.lambda,
            mu: raw.mu,
            alpha: raw.alpha,
            n0: raw.n0 as usize,
            k: raw.k as usize,
            capacity: raw.capacity as usize,
        })
    }
}

impl From<SystemParams> for RawParams {
    fn from(p: SystemParams) -> Self {
        RawParams {
            lambda: p.lambda,
            mu: p.mu,
            alpha: p.alpha,
            n0: p.n0 as i64,
            k: p.k as i64,
            capacity: p.capacity as i64,
        }
    }
}

impl SystemParams {
    pub fn new(
        lambda: f64,
        mu: f64,
        alpha: f64,
        n0: usize,
        k: usize,
        capacity: usize,
    ) -> Result<Self, ParamError> {
        RawParams {
            lambda,
            mu,
            alpha,
            n0: n0 as i64,
            k: k as i64,
            capacity: capacity as i64,
        }
        .try_into()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Legacy block size.
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Number of dynamic instances.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Maximum number of jobs in the system (`K`).
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total server count `N = n0 + k`.
    pub fn servers(&self) -> usize {
        self.n0 + self.k
    }

    /// Servers available with `level` dynamic instances active: `n_i = n0 + i`.
    pub fn servers_at(&self, level: usize) -> usize {
        self.n0 + level
    }

    /// Job count at which instance `i` (1-based) starts its setup.
    pub fn up_threshold(&self, i: usize) -> usize {
        self.servers_at(i)
    }

    /// Job count at which instance `i` (1-based) is powered off.
    pub fn down_threshold(&self, i: usize) -> usize {
        self.servers_at(i - 1)
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self, ParamError> {
        Self::new(lambda, self.mu, self.alpha, self.n0, self.k, self.capacity)
    }

    pub fn with_k(self, k: usize) -> Result<Self, ParamError> {
        Self::new(self.lambda, self.mu, self.alpha, self.n0, k, self.capacity)
    }

    pub fn raw(&self) -> RawParams {
        (*self).into()
    }
}
