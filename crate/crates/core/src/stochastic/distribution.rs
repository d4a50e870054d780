use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Uniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StatNormal};

use crate::error::{Error, Result};

/// Service-time law. Literal forms: `det(v)`, `exp(rate)`, `unif(lo,hi)`,
/// `norm(mean,sd)` (normal truncated at zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ServiceDistribution {
    Deterministic(f64),
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64, truncated: bool },
}

impl ServiceDistribution {
    pub fn deterministic(v: f64) -> Result<Self> {
        Self::Deterministic(v).validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::Uniform { lo, hi }.validated()
    }

    /// Normal law truncated at zero.
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::Normal {
            mean,
            sd,
            truncated: true,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("{self}: {msg}")));
        match self {
            Self::Deterministic(v) if !(v.is_finite() && v >= 0.0) => {
                bad("value must be finite and nonnegative")
            }
            Self::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => {
                bad("rate must be positive")
            }
            Self::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) => {
                bad("need 0 <= lo <= hi")
            }
            Self::Normal { mean, sd, .. } if !(mean.is_finite() && sd.is_finite() && sd > 0.0) => {
                bad("need finite mean and sd > 0")
            }
            Self::Normal {
                mean,
                sd,
                truncated: true,
            } if mean / sd < -6.0 => bad("truncation point too far in the upper tail"),
            _ => Ok(self),
        }
    }

    /// Whether every sample is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        !matches!(
            self,
            Self::Normal {
                truncated: false,
                ..
            }
        )
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Self::Deterministic(_)) || matches!(self, Self::Uniform { lo, hi } if lo == hi)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Deterministic(v) => v,
            Self::Exponential { rate } => 1.0 / rate,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Normal {
                mean,
                truncated: false,
                ..
            } => mean,
            Self::Normal { mean, sd, .. } => {
                let z = StatNormal::standard();
                let alpha = -mean / sd;
                mean + sd * z.pdf(alpha) / z.sf(alpha)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Deterministic(v) => v,
            Self::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
            Self::Uniform { lo, hi } if lo == hi => lo,
            Self::Uniform { lo, hi } => Uniform::new_inclusive(lo, hi).expect("validated").sample(rng),
            Self::Normal {
                mean,
                sd,
                truncated,
            } => {
                let d = Normal::new(mean, sd).expect("validated");
                loop {
                    let x = d.sample(rng);
                    if !truncated || x >= 0.0 {
                        return x;
                    }
                }
            }
        }
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Deterministic(v) => write!(f, "det({v})"),
            Self::Exponential { rate } => write!(f, "exp({rate})"),
            Self::Uniform { lo, hi } => write!(f, "unif({lo},{hi})"),
            Self::Normal {
                mean,
                sd,
                truncated: true,
            } => write!(f, "norm({mean},{sd})"),
            Self::Normal { mean, sd, .. } => write!(f, "normfull({mean},{sd})"),
        }
    }
}

impl FromStr for ServiceDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(v) = t.parse::<f64>() {
            return Self::deterministic(v);
        }
        let err = || Error::Parse(format!("bad distribution literal {t:?}"));
        let (name, rest) = t.split_once('(').ok_or_else(err)?;
        let args = rest.strip_suffix(')').ok_or_else(err)?;
        let args: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err())?;
        match (name.trim(), args.as_slice()) {
            ("det", [v]) => Self::deterministic(*v),
            ("exp", [rate]) => Self::exponential(*rate),
            ("unif", [lo, hi]) => Self::uniform(*lo, *hi),
            ("norm", [mean, sd]) => Self::normal(*mean, *sd),
            _ => Err(err()),
        }
    }
}

impl TryFrom<String> for ServiceDistribution {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ServiceDistribution> for String {
    fn from(d: ServiceDistribution) -> String {
        d.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn literals_roundtrip() {
        for s in ["det(2.5)", "exp(1)", "exp(0.5)", "unif(0,2)", "norm(1,0.25)"] {
            let d: ServiceDistribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert_eq!("3".parse::<ServiceDistribution>().unwrap(), ServiceDistribution::Deterministic(3.0));
        assert!("exp(-1)".parse::<ServiceDistribution>().is_err());
        assert!("unif(2,1)".parse::<ServiceDistribution>().is_err());
        assert!("gamma(1,2)".parse::<ServiceDistribution>().is_err());
        assert!("exp(1".parse::<ServiceDistribution>().is_err());
    }

    #[test]
    fn means() {
        assert_eq!(ServiceDistribution::exponential(4.0).unwrap().mean(), 0.25);
        assert_eq!(ServiceDistribution::uniform(1.0, 3.0).unwrap().mean(), 2.0);
        // half-normal: sd * sqrt(2/pi)
        let hn = ServiceDistribution::normal(0.0, 1.0).unwrap().mean();
        assert!((hn - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn samples_are_nonnegative_and_match_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [
            ServiceDistribution::exponential(2.0).unwrap(),
            ServiceDistribution::uniform(0.5, 1.5).unwrap(),
            ServiceDistribution::normal(0.2, 1.0).unwrap(),
        ] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            assert!(xs.iter().all(|&x| x >= 0.0));
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((m - d.mean()).abs() < 4.0 * se, "{d}: {m} vs {}", d.mean());
        }
    }

    #[test]
    fn serde_uses_literals() {
        let d = ServiceDistribution::exponential(2.0).unwrap();
        assert_eq!(serde_json::to_string(&d).unwrap(), "\"exp(2)\"");
        let back: ServiceDistribution = serde_json::from_str("\"exp(2)\"").unwrap();
        assert_eq!(back, d);
    }
}
