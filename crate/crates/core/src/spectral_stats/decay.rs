use serde::{Deserialize, Serialize};

use super::witness::LowerBoundConfig;
use crate::error::{Error, Result};
use crate::potential::PotentialModel;

/// Number of lattice sites with |k|_∞ = r in Z^d.
pub fn shell_size(dim: usize, r: usize) -> usize {
    if r == 0 {
        1
    } else {
        (2 * r + 1).pow(dim as u32) - (2 * r - 1).pow(dim as u32)
    }
}

/// Σ_{R ≤ |k|_∞ ≤ r_max} f(|k|_∞) by direct shell summation.
pub fn shell_tail_sum(dim: usize, r: usize, r_max: usize, f: impl Fn(usize) -> f64) -> f64 {
    (r..=r_max).map(|s| shell_size(dim, s) as f64 * f(s)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayMargin {
    pub r: f64,
    /// Bound on the contribution of all sites beyond R.
    pub tail_bound: f64,
    /// Smallest R with tail bound ≤ the requested error.
    pub r_min: f64,
    /// Support radius in lattice units when the single-site potential has
    /// compact support.
    pub support_radius: Option<f64>,
}

/// Far-field control of a decaying single-site potential: C/(ε·R^ε), or 0
/// beyond the support for compactly supported families.
pub fn summable_decay_margin(cfg: &LowerBoundConfig, model: &PotentialModel, r: f64, error: f64) -> Result<DecayMargin> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {}", cfg.epsilon)));
    }
    if !(r > 0.0) || !(error > 0.0) {
        return Err(Error::Domain(format!("need R > 0 and error > 0, got R = {r}, error = {error}")));
    }
    let reach = model.single_site.max_reach(&model.geometry);
    let support = reach.iter().cloned().fold(0.0, f64::max);
    if support.is_finite() {
        return Ok(DecayMargin {
            r,
            tail_bound: if r >= support { 0.0 } else { cfg.c_decay / (cfg.epsilon * r.powf(cfg.epsilon)) },
            r_min: support,
            support_radius: Some(support),
        });
    }
    Ok(DecayMargin {
        r,
        tail_bound: cfg.c_decay / (cfg.epsilon * r.powf(cfg.epsilon)),
        r_min: (cfg.c_decay / (cfg.epsilon * error)).powf(1.0 / cfg.epsilon),
        support_radius: None,
    })
}

/// The far-field formula on its own, for decay profiles given explicitly.
pub fn decay_tail_bound(c_decay: f64, epsilon: f64, r: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(c_decay / (epsilon * r.powf(epsilon)))
}
