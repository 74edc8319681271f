use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of a coupling parameter λ ∈ [0, 1].
///
/// Every law is sampled by inverse transform from one uniform variate, which
/// keeps draws a pure function of the keyed stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum CouplingLaw {
    Uniform {
        #[serde(default)]
        lo: f64,
        #[serde(default = "one")]
        hi: f64,
    },
    PointMass { value: f64 },
    /// Probability `weight` at 0, otherwise distributed as `rest`.
    AtomAtZero { weight: f64, rest: Box<CouplingLaw> },
    /// Inverse CDF through `quantiles[i]` at probability `i/(m−1)`, linear in between.
    Tabulated { quantiles: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl Default for CouplingLaw {
    fn default() -> Self {
        CouplingLaw::Uniform { lo: 0.0, hi: 1.0 }
    }
}

impl CouplingLaw {
    pub fn uniform() -> Self {
        Self::default()
    }

    /// Inverse-CDF map of a uniform `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            CouplingLaw::Uniform { lo, hi } => lo + (hi - lo) * u,
            CouplingLaw::PointMass { value } => *value,
            CouplingLaw::AtomAtZero { weight, rest } => {
                if u < *weight {
                    0.0
                } else {
                    rest.quantile(((u - weight) / (1.0 - weight)).min(1.0))
                }
            }
            CouplingLaw::Tabulated { quantiles } => {
                let m = quantiles.len() - 1;
                let t = u * m as f64;
                let i = (t.floor() as usize).min(m - 1);
                let f = t - i as f64;
                quantiles[i] * (1.0 - f) + quantiles[i + 1] * f
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            CouplingLaw::Uniform { lo, hi } => {
                if x < *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            CouplingLaw::PointMass { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingLaw::AtomAtZero { weight, rest } => {
                if x < 0.0 {
                    0.0
                } else {
                    weight + (1.0 - weight) * rest.cdf(x)
                }
            }
            CouplingLaw::Tabulated { quantiles } => {
                let m = (quantiles.len() - 1) as f64;
                if x < quantiles[0] {
                    return 0.0;
                }
                // largest probability p with Q(p) <= x
                let mut p: f64 = 0.0;
                for (i, w) in quantiles.windows(2).enumerate() {
                    if x >= w[1] {
                        p = (i + 1) as f64 / m;
                    } else if x >= w[0] {
                        let f = if w[1] > w[0] { (x - w[0]) / (w[1] - w[0]) } else { 1.0 };
                        p = p.max((i as f64 + f) / m);
                        break;
                    } else {
                        break;
                    }
                }
                p.min(1.0)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            CouplingLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            CouplingLaw::PointMass { value } => *value,
            CouplingLaw::AtomAtZero { weight, rest } => (1.0 - weight) * rest.mean(),
            CouplingLaw::Tabulated { quantiles } => {
                let m = (quantiles.len() - 1) as f64;
                quantiles.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / m
            }
        }
    }

    /// P{λ = 0}
    pub fn prob_zero(&self) -> f64 {
        match self {
            CouplingLaw::Uniform { lo, hi } => {
                if *lo == 0.0 && *hi == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingLaw::PointMass { value } => {
                if *value == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingLaw::AtomAtZero { weight, rest } => weight + (1.0 - weight) * rest.prob_zero(),
            CouplingLaw::Tabulated { quantiles } => {
                let m = (quantiles.len() - 1) as f64;
                quantiles.windows(2).filter(|w| w[0] == 0.0 && w[1] == 0.0).count() as f64 / m
            }
        }
    }

    /// Whether P{λ ≤ ε} > 0 for every ε > 0.
    pub fn zero_in_support(&self) -> bool {
        match self {
            CouplingLaw::Uniform { lo, .. } => *lo == 0.0,
            CouplingLaw::PointMass { value } => *value == 0.0,
            CouplingLaw::AtomAtZero { weight, rest } => *weight > 0.0 || rest.zero_in_support(),
            CouplingLaw::Tabulated { quantiles } => quantiles[0] == 0.0,
        }
    }

    /// Errors that make the law ill-defined as a distribution on [0, 1].
    pub fn distribution_errors(&self) -> Vec<String> {
        let mut e = Vec::new();
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        match self {
            CouplingLaw::Uniform { lo, hi } => {
                if !unit(*lo) || !unit(*hi) || lo > hi {
                    e.push(format!("lo/hi: need 0 <= lo <= hi <= 1, got [{lo}, {hi}]"));
                }
            }
            CouplingLaw::PointMass { value } => {
                if !unit(*value) {
                    e.push(format!("value: must be in [0, 1], got {value}"));
                }
            }
            CouplingLaw::AtomAtZero { weight, rest } => {
                if !(weight.is_finite() && (0.0..1.0).contains(weight)) {
                    e.push(format!("weight: must be in [0, 1), got {weight}"));
                }
                e.extend(rest.distribution_errors().into_iter().map(|m| format!("rest.{m}")));
            }
            CouplingLaw::Tabulated { quantiles } => {
                if quantiles.len() < 2 {
                    e.push("quantiles: need at least 2 entries".into());
                } else if quantiles.iter().any(|q| !unit(*q)) || quantiles.windows(2).any(|w| w[1] < w[0]) {
                    e.push("quantiles: must be nondecreasing values in [0, 1]".into());
                }
            }
        }
        e
    }

    /// Distribution errors plus the requirement P{λ = 0} < 1.
    pub fn validate(&self) -> Vec<String> {
        let mut e = self.distribution_errors();
        if e.is_empty() && self.prob_zero() >= 1.0 {
            e.push("law: P{lambda = 0} must be < 1".into());
        }
        e
    }

    /// Like [`check`](Self::check) but accepts λ ≡ 0, which is a valid
    /// distribution used for free reference runs.
    pub fn check_distribution(&self) -> Result<()> {
        let e = self.distribution_errors();
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(e.join("; ")))
        }
    }

    pub fn check(&self) -> Result<()> {
        let e = self.validate();
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(e.join("; ")))
        }
    }
}
