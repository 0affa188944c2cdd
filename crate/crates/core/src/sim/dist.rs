use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal, Pareto, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a positive random duration; the mean is supplied separately.
///
/// Textual form (used on the command line and in config files): `exp`,
/// `det`, `erlang:<stages>`, `uniform:<spread>`, `normal:<cv>`,
/// `pareto:<shape>`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    #[default]
    Exponential,
    Deterministic,
    /// Sum of `stages` exponential phases.
    Erlang { stages: u32 },
    /// Uniform on `mean * [1 - spread, 1 + spread]`, `0 < spread <= 1`.
    Uniform { spread: f64 },
    /// Normal with standard deviation `cv * mean`, resampled until positive.
    TruncatedNormal { cv: f64 },
    /// Pareto with tail index `shape > 1`, scaled to the requested mean.
    Pareto { shape: f64 },
}

impl Family {
    pub fn is_exponential(&self) -> bool {
        matches!(self, Family::Exponential)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::SimConfig(msg));
        match *self {
            Family::Erlang { stages: 0 } => bad("erlang needs at least one stage".into()),
            Family::Uniform { spread } if !(spread > 0.0 && spread <= 1.0) => {
                bad(format!("uniform spread must be in (0, 1], got {spread}"))
            }
            Family::TruncatedNormal { cv } if !(cv > 0.0 && cv.is_finite()) => {
                bad(format!("normal cv must be > 0, got {cv}"))
            }
            Family::Pareto { shape } if !(shape > 1.0 && shape.is_finite()) => {
                bad(format!("pareto shape must be > 1 for a finite mean, got {shape}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Exponential => write!(f, "exp"),
            Family::Deterministic => write!(f, "det"),
            Family::Erlang { stages } => write!(f, "erlang:{stages}"),
            Family::Uniform { spread } => write!(f, "uniform:{spread}"),
            Family::TruncatedNormal { cv } => write!(f, "normal:{cv}"),
            Family::Pareto { shape } => write!(f, "pareto:{shape}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let num = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::SimConfig(format!("{name} needs a {what}, e.g. {name}:2")))?
                .parse::<f64>()
                .map_err(|e| Error::SimConfig(format!("bad {what} in '{s}': {e}")))
        };
        let family = match (name.to_ascii_lowercase().as_str(), arg) {
            ("exp" | "exponential", None) => Family::Exponential,
            ("det" | "deterministic", None) => Family::Deterministic,
            ("erlang", _) => {
                let stages = num("stage count")?;
                if stages.fract() != 0.0 || stages < 1.0 || stages > u32::MAX as f64 {
                    return Err(Error::SimConfig(format!("erlang stage count must be a positive integer, got {stages}")));
                }
                Family::Erlang { stages: stages as u32 }
            }
            ("uniform", _) => Family::Uniform { spread: num("spread")? },
            ("normal", _) => Family::TruncatedNormal { cv: num("coefficient of variation")? },
            ("pareto", _) => Family::Pareto { shape: num("shape")? },
            _ => return Err(Error::SimConfig(format!("unknown distribution '{s}'"))),
        };
        family.validate()?;
        Ok(family)
    }
}

impl TryFrom<String> for Family {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

/// A duration distribution: family plus mean in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub family: Family,
    pub mean: f64,
}

impl DistributionSpec {
    pub fn new(family: Family, mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::SimConfig(format!("mean must be > 0, got {mean}")));
        }
        family.validate()?;
        Ok(DistributionSpec { family, mean })
    }

    pub fn sampler(&self) -> Sampler {
        let m = self.mean;
        match self.family {
            Family::Exponential => Sampler::Exp(Exp::new(1.0 / m).expect("validated")),
            Family::Deterministic => Sampler::Fixed(m),
            Family::Erlang { stages } => {
                Sampler::Gamma(Gamma::new(stages as f64, m / stages as f64).expect("validated"))
            }
            Family::Uniform { spread } => {
                Sampler::Uniform(Uniform::new_inclusive(m * (1.0 - spread), m * (1.0 + spread)).expect("validated"))
            }
            Family::TruncatedNormal { cv } => Sampler::Normal(Normal::new(m, cv * m).expect("validated")),
            Family::Pareto { shape } => {
                Sampler::Pareto(Pareto::new(m * (shape - 1.0) / shape, shape).expect("validated"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Exp(Exp<f64>),
    Fixed(f64),
    Gamma(Gamma<f64>),
    Uniform(Uniform<f64>),
    Normal(Normal<f64>),
    Pareto(Pareto<f64>),
}

impl Sampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Fixed(v) => *v,
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Normal(d) => loop {
                let x = d.sample(rng);
                if x > 0.0 {
                    break x;
                }
            },
            Sampler::Pareto(d) => d.sample(rng),
        }
    }
}
