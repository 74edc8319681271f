use serde::{Deserialize, Serialize};

use super::sampling::{BoxSetup, Campaign};
use super::wilson::{wilson_interval, Interval};
use crate::bounds::ProofConstants;
use crate::eigensolve::count_at_most;
use crate::error::{Error, Result};
use crate::operators::{periodic_ground_state, BcKind};
use crate::potential::PotentialModel;

pub const DEFAULT_ENERGY_RATIO: f64 = 2.0;

/// Energies E₀ + offset for a strictly increasing list of positive offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub e0: f64,
    pub offsets: Vec<f64>,
}

impl EnergyGrid {
    pub fn new(e0: f64, offsets: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::Domain("energy grid needs at least one offset".into()));
        }
        if offsets.iter().any(|&o| !(o > 0.0 && o.is_finite())) {
            return Err(Error::Domain("energy offsets must be positive".into()));
        }
        if offsets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("energy offsets must be strictly increasing".into()));
        }
        Ok(EnergyGrid { e0, offsets })
    }

    /// `count` offsets `smallest·ratio^i`.
    pub fn geometric(e0: f64, smallest: f64, count: usize, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::Domain(format!("grid ratio must exceed 1, got {ratio}")));
        }
        Self::new(e0, (0..count).map(|i| smallest * ratio.powi(i as i32)).collect())
    }

    /// `count` offsets `largest/ratio^i`, stored in increasing order.
    pub fn geometric_down(e0: f64, largest: f64, count: usize, ratio: f64) -> Result<Self> {
        Self::geometric(e0, largest / ratio.powi(count as i32 - 1), count, ratio)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.offsets.iter().map(|o| self.e0 + o).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub offset: f64,
    pub energy: f64,
    /// L_E, or None when the energy is out of regime.
    pub level: Option<usize>,
    pub samples: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub interval: Interval,
    /// exp(−C(E−E₀)^{−d/2}) with C = β²δ^{d/2}/16.
    pub bound: f64,
    pub out_of_regime: bool,
}

/// P{E₁(H_ω^{L_E,♯}) ≤ E} along an energy grid whose E₀ is replaced by the
/// discrete periodic ground-state energy of the model.
///
/// Samples at energy index `j` use the campaign seed derived from `(seed, j)`.
pub fn tail_probability(
    model: &PotentialModel,
    bc: BcKind,
    offsets: &[f64],
    constants: &ProofConstants,
    n_h: usize,
    campaign: &Campaign,
) -> Result<Vec<TailEstimate>> {
    let ground = periodic_ground_state(&model.geometry, &model.background, n_h)?;
    let grid = EnergyGrid::new(ground.e0, offsets.to_vec())?;
    let d = model.dim();
    let mut out = Vec::with_capacity(grid.len());
    for (j, &offset) in grid.offsets.iter().enumerate() {
        let energy = grid.e0 + offset;
        let bound = constants.tail_bound(offset, d);
        let level = match constants.critical_length(energy, grid.e0) {
            Ok(l) => l,
            Err(Error::OutOfRegime(_)) => {
                out.push(TailEstimate {
                    offset,
                    energy,
                    level: None,
                    samples: 0,
                    hits: 0,
                    p_hat: f64::NAN,
                    interval: Interval { lo: 0.0, hi: 1.0 },
                    bound,
                    out_of_regime: true,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let setup = BoxSetup::with_ground(model, ground.clone(), level)?;
        let bcond = setup.bc(bc)?;
        let sub = campaign.child(j as u64);
        let hits: Vec<bool> = sub.map(|i| {
            let h = setup.sample(sub.seed, i, &bcond)?;
            Ok(count_at_most(&h.matrix, energy) >= 1)
        })?;
        let hits = hits.iter().filter(|&&b| b).count();
        let samples = campaign.samples;
        out.push(TailEstimate {
            offset,
            energy,
            level: Some(level),
            samples,
            hits,
            p_hat: if samples > 0 { hits as f64 / samples as f64 } else { f64::NAN },
            interval: wilson_interval(hits, samples),
            bound,
            out_of_regime: false,
        });
    }
    Ok(out)
}
