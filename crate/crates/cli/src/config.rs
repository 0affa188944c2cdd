use std::fs;
use std::path::Path;

use serde::Deserialize;
use vnfscale_core::{CostSpec, Family, RawParams, SimConfig, SystemParams};

use crate::args::{BaseFlags, ParamFlags, SimFlags};
use crate::CliError;

pub const DEFAULT_N0: i64 = 110;
pub const DEFAULT_MU: f64 = 1.0;
pub const DEFAULT_ALPHA: f64 = 0.005;
pub const DEFAULT_CAPACITY: i64 = 250;

/// Parameters as they may appear in a config file; every field optional.
#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialParams {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub n0: Option<i64>,
    pub k: Option<i64>,
    #[serde(rename = "K")]
    pub capacity: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub params: PartialParams,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub cost: CostSpec,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("bad config {}: {e}", path.display())))
    }

    /// Flags first, then this file, then the built-in defaults.
    pub fn raw_params(&self, flags: &BaseFlags, k: Option<i64>) -> Result<RawParams, CliError> {
        let f = &self.params;
        let lambda = flags
            .lambda
            .or(f.lambda)
            .ok_or_else(|| CliError::Invalid("lambda is required (--lambda or params.lambda)".into()))?;
        Ok(RawParams {
            lambda,
            mu: flags.mu.or(f.mu).unwrap_or(DEFAULT_MU),
            alpha: flags.alpha.or(f.alpha).unwrap_or(DEFAULT_ALPHA),
            n0: flags.n0.or(f.n0).unwrap_or(DEFAULT_N0),
            k: k.or(f.k).unwrap_or(0),
            capacity: flags.capacity.or(f.capacity).unwrap_or(DEFAULT_CAPACITY),
        })
    }

    pub fn params(&self, flags: &ParamFlags) -> Result<SystemParams, CliError> {
        let raw = self.raw_params(&flags.base, flags.k)?;
        if flags.k.is_none() && self.params.k.is_none() {
            return Err(CliError::Invalid("k is required (--k or params.k)".into()));
        }
        Ok(SystemParams::try_from(raw)?)
    }

    pub fn sim(&self, flags: &SimFlags) -> Result<SimConfig, CliError> {
        let dist = |flag: &Option<String>, file: Family| -> Result<Family, CliError> {
            match flag {
                Some(s) => Ok(s.parse()?),
                None => Ok(file),
            }
        };
        let base = self.sim;
        let warmup = flags.warmup.or(base.warmup);
        let config = SimConfig {
            horizon: flags.horizon.unwrap_or(base.horizon),
            warmup,
            replications: flags.replications.unwrap_or(base.replications),
            seed: flags.seed.unwrap_or(base.seed),
            interarrival: dist(&flags.arrival_dist, base.interarrival)?,
            service: dist(&flags.service_dist, base.service)?,
            setup: dist(&flags.setup_dist, base.setup)?,
        };
        config.validate()?;
        Ok(config)
    }
}
