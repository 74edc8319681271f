use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Law of i.i.d. variables X_k ∈ [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ConcentrationLaw {
    Bernoulli { p: f64 },
    Uniform,
    Constant { c: f64 },
    /// Atoms `values[i]` with probabilities `weights[i]`.
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl ConcentrationLaw {
    pub fn mean(&self) -> f64 {
        match self {
            ConcentrationLaw::Bernoulli { p } => *p,
            ConcentrationLaw::Uniform => 0.5,
            ConcentrationLaw::Constant { c } => *c,
            ConcentrationLaw::Discrete { values, weights } => values.iter().zip(weights).map(|(v, w)| v * w).sum(),
        }
    }

    /// M(t) = E[exp(t(E[X] − 2X))]
    pub fn mgf(&self, t: f64) -> f64 {
        let m = self.mean();
        match self {
            ConcentrationLaw::Bernoulli { p } => (1.0 - p) * (t * m).exp() + p * (t * (m - 2.0)).exp(),
            ConcentrationLaw::Uniform => {
                if t.abs() < 1e-8 {
                    // (1 − e^{−2t})/(2t) → 1 − t
                    (t / 2.0).exp() * (1.0 - t)
                } else {
                    (t / 2.0).exp() * (1.0 - (-2.0 * t).exp()) / (2.0 * t)
                }
            }
            ConcentrationLaw::Constant { c } => (-t * c).exp(),
            ConcentrationLaw::Discrete { values, weights } => {
                values.iter().zip(weights).map(|(v, w)| w * (t * (m - 2.0 * v)).exp()).sum()
            }
        }
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            ConcentrationLaw::Bernoulli { p } => {
                if u < *p {
                    1.0
                } else {
                    0.0
                }
            }
            ConcentrationLaw::Uniform => u,
            ConcentrationLaw::Constant { c } => *c,
            ConcentrationLaw::Discrete { values, weights } => {
                let mut acc = 0.0;
                for (v, w) in values.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let ok = match self {
            ConcentrationLaw::Bernoulli { p } => unit(*p),
            ConcentrationLaw::Uniform => true,
            ConcentrationLaw::Constant { c } => unit(*c),
            ConcentrationLaw::Discrete { values, weights } => {
                values.len() == weights.len()
                    && !values.is_empty()
                    && values.iter().all(|v| unit(*v))
                    && weights.iter().all(|w| *w >= 0.0)
                    && (weights.iter().sum::<f64>() - 1.0).abs() < 1e-12
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid concentration law {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernoffRate {
    pub s: f64,
    pub m_s: f64,
    /// Cld = |ln M(s)|
    pub cld: f64,
}

pub const CHERNOFF_T_MAX: f64 = 50.0;

/// Minimize M over (0, 50] by golden-section search to a 1e-8 bracket.
pub fn chernoff_rate(law: &ConcentrationLaw) -> Result<ChernoffRate> {
    law.validate()?;
    if !(law.mean() > 0.0) {
        return Err(Error::Domain("Chernoff rate needs E[X] > 0".into()));
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, CHERNOFF_T_MAX);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (law.mgf(c), law.mgf(d));
    while b - a > 1e-8 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = law.mgf(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = law.mgf(d);
        }
    }
    let mut s = 0.5 * (a + b);
    let mut m_s = law.mgf(s);
    let m_end = law.mgf(CHERNOFF_T_MAX);
    if m_end < m_s {
        s = CHERNOFF_T_MAX;
        m_s = m_end;
    }
    if !(m_s < 1.0) {
        return Err(Error::Domain(format!("no t in (0, {CHERNOFF_T_MAX}] with M(t) < 1")));
    }
    Ok(ChernoffRate { s, m_s, cld: -m_s.ln() })
}

/// exp(−β²n/16)
pub fn bernstein_bound(beta: f64, n: usize) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta must be in (0, 1], got {beta}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    Ok((-beta * beta * n as f64 / 16.0).exp())
}

/// ln C(n, j)
fn ln_binomial(n: usize, j: usize) -> f64 {
    let j = j.min(n - j);
    (1..=j).map(|i| ((n - j + i) as f64 / i as f64).ln()).sum()
}

/// P{Bin(n, p) ≤ m}, summed in log space.
pub fn binomial_cdf(n: usize, p: f64, m: usize) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if m >= n { 1.0 } else { 0.0 };
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let terms: Vec<f64> = (0..=m.min(n)).map(|j| ln_binomial(n, j) + j as f64 * lp + (n - j) as f64 * lq).collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (top.exp() * terms.iter().map(|t| (t - top).exp()).sum::<f64>()).min(1.0)
}

/// P{S_n ≤ β/2} for S_n the mean of n Bernoulli(β) variables.
pub fn exact_bernoulli_tail(beta: f64, n: usize) -> f64 {
    let m = (n as f64 * beta / 2.0 + 1e-12).floor() as usize;
    binomial_cdf(n, beta, m)
}

/// Fraction of `runs` simulations with S_n ≤ E[S_n]/2.
pub fn simulate_lower_tail(law: &ConcentrationLaw, n: usize, runs: usize, seed: u64) -> f64 {
    let half = law.mean() / 2.0;
    let mut hits = 0usize;
    for r in 0..runs {
        let mut rng = seed::stream(&[seed, n as u64, r as u64]);
        let s: f64 = (0..n).map(|_| law.quantile(rng.gen::<f64>())).sum::<f64>() / n as f64;
        if s <= half {
            hits += 1;
        }
    }
    hits as f64 / runs as f64
}
