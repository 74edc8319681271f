use serde::{Deserialize, Serialize};

use super::sampling::{BoxSetup, Campaign};
use crate::eigensolve::{count_at_most, counting_function, lowest_eigenpairs, SolverConfig};
use crate::error::Result;
use crate::operators::{BcKind, DiscreteHamiltonian};
use crate::potential::PotentialModel;
use crate::spectral_stats::Interval;

/// How n(E) is obtained for each sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountingMode {
    /// Exact count by matrix inertia.
    Inertia,
    /// The `k` lowest eigenvalues; energies above the k-th are unresolved.
    Lowest(usize),
}

fn counts(h: &DiscreteHamiltonian, energies: &[f64], mode: CountingMode) -> Result<Vec<usize>> {
    match mode {
        CountingMode::Inertia => Ok(energies.iter().map(|&e| count_at_most(&h.matrix, e)).collect()),
        CountingMode::Lowest(k) => {
            let spec = lowest_eigenpairs(&h.matrix, &SolverConfig::lowest(k.min(h.dof())))?;
            energies.iter().map(|&e| counting_function(&spec, e)).collect()
        }
    }
}

/// n^♯(E) for every `bcs` × `energies` on one sample; `[bc][energy]`.
pub fn sample_counts(
    setup: &BoxSetup,
    bcs: &[BcKind],
    energies: &[f64],
    seed: u64,
    sample: u64,
    mode: CountingMode,
) -> Result<Vec<Vec<usize>>> {
    let w = setup.w(&setup.realization(seed, sample)?);
    bcs.iter()
        .map(|&bc| {
            let h = setup.hamiltonian(&w, &setup.bc(bc)?)?;
            counts(&h, energies, mode)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsPoint {
    pub bc: BcKind,
    pub energy: f64,
    /// Sample mean of N_L^♯(E) = n^♯(E)/|Λ_L|.
    pub mean: f64,
    pub std_err: f64,
    /// Normal-approximation 95% interval of the mean.
    pub interval: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsCurve {
    pub level: usize,
    pub samples: usize,
    pub volume: f64,
    pub e0: f64,
    pub points: Vec<IdsPoint>,
    /// Raw counts `[sample][bc][energy]`.
    #[serde(skip)]
    pub counts: Vec<Vec<Vec<usize>>>,
}

impl IdsCurve {
    /// The estimates for one boundary condition, in energy order.
    pub fn for_bc(&self, bc: BcKind) -> Vec<&IdsPoint> {
        self.points.iter().filter(|p| p.bc == bc).collect()
    }
}

/// E[N_L^♯(E)] on Λ_L for every boundary condition in `bcs`, all boundary
/// conditions sharing each sampled realization.
pub fn ids_curve(
    model: &PotentialModel,
    bcs: &[BcKind],
    level: usize,
    energies: &[f64],
    n_h: usize,
    campaign: &Campaign,
    mode: CountingMode,
) -> Result<IdsCurve> {
    let setup = BoxSetup::new(model, level, n_h)?;
    let counts = campaign.map(|i| sample_counts(&setup, bcs, energies, campaign.seed, i, mode))?;
    let volume = setup.volume();
    let n = counts.len() as f64;
    let mut points = Vec::with_capacity(bcs.len() * energies.len());
    for (b, &bc) in bcs.iter().enumerate() {
        for (j, &energy) in energies.iter().enumerate() {
            let vals: Vec<f64> = counts.iter().map(|c| c[b][j] as f64 / volume).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let std_err = (var / n).sqrt();
            points.push(IdsPoint {
                bc,
                energy,
                mean,
                std_err,
                interval: Interval {
                    lo: (mean - 1.96 * std_err).max(0.0),
                    hi: mean + 1.96 * std_err,
                },
            });
        }
    }
    Ok(IdsCurve {
        level,
        samples: campaign.samples,
        volume,
        e0: setup.e0(),
        points,
        counts,
    })
}
