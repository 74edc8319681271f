use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::fit::least_squares;
use super::sampling::{BoxSetup, Campaign};
use super::wilson::{wilson_interval, Interval};
use crate::eigensolve::{lowest_eigenpairs, SolverConfig};
use crate::error::{Error, Result};
use crate::operators::{BcKind, BoxGrid, DiscreteHamiltonian};
use crate::potential::PotentialModel;

/// Largest box handled by the dense resolvent.
pub const DENSE_RESOLVENT_LIMIT: usize = 2000;

/// A node set at a given distance from the source set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtTarget {
    pub distance: f64,
    pub nodes: Vec<usize>,
}

/// Nodes of the cells with |k|_∞ = s, for s = 1..=max_shell, tagged with the
/// gap distance s − 1 to the centre cell.
pub fn cell_shells(grid: &BoxGrid, max_shell: usize) -> Vec<CtTarget> {
    let mut shells = vec![Vec::new(); max_shell + 1];
    for node in 0..grid.dof() {
        let s = (0..grid.dim()).map(|a| grid.cell_of(a, grid.multi_index(node)[a]).unsigned_abs() as usize).max().unwrap_or(0);
        if s <= max_shell {
            shells[s].push(node);
        }
    }
    shells
        .into_iter()
        .enumerate()
        .skip(1)
        .filter(|(_, n)| !n.is_empty())
        .map(|(s, nodes)| CtTarget {
            distance: (s - 1) as f64,
            nodes,
        })
        .collect()
}

/// Nodes of the centre cell k = 0.
pub fn centre_cell(grid: &BoxGrid) -> Vec<usize> {
    grid.cell_nodes(&vec![0; grid.dim()])
}

/// ‖1_T (E − H)⁻¹ 1_S‖ for every target set T (largest singular value).
pub fn resolvent_block_norms(h: &DiscreteHamiltonian, e: f64, source: &[usize], targets: &[CtTarget]) -> Result<Vec<f64>> {
    let n = h.dof();
    if n > DENSE_RESOLVENT_LIMIT {
        return Err(Error::Refused(format!(
            "dense resolvent of {n} unknowns exceeds the limit {DENSE_RESOLVENT_LIMIT}"
        )));
    }
    let mut a = h.matrix.to_dense();
    for i in 0..n {
        a[(i, i)] -= e;
    }
    let lu = a.lu();
    let mut cols = DMatrix::zeros(n, source.len());
    for (c, &s) in source.iter().enumerate() {
        let mut rhs = DVector::zeros(n);
        rhs[s] = 1.0;
        let x = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Domain(format!("E = {e} is an eigenvalue of H")))?;
        cols.set_column(c, &x);
    }
    Ok(targets
        .iter()
        .map(|t| {
            let block = DMatrix::from_fn(t.nodes.len(), source.len(), |r, c| cols[(t.nodes[r], c)]);
            block.singular_values().iter().cloned().fold(0.0, f64::max)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtDecay {
    pub energy: f64,
    pub e1: f64,
    pub distances: Vec<f64>,
    pub norms: Vec<f64>,
    /// −slope of ln‖·‖ against distance.
    pub rate: f64,
    pub intercept: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    /// rate/(E₁ − E)
    pub rate_ratio: f64,
}

/// Off-diagonal resolvent norms of `h` at an energy below its spectrum and
/// their log-linear fit in the distance.
pub fn ct_decay(h: &DiscreteHamiltonian, e: f64, source: &[usize], targets: &[CtTarget]) -> Result<CtDecay> {
    let e1 = lowest_eigenpairs(&h.matrix, &SolverConfig { tol: 1e-10, ..SolverConfig::lowest(1) })?.eigenvalues[0];
    if e >= e1 {
        return Err(Error::HypothesisViolated(format!("E = {e} is not below E1 = {e1}")));
    }
    let norms = resolvent_block_norms(h, e, source, targets)?;
    let distances: Vec<f64> = targets.iter().map(|t| t.distance).collect();
    let pts: Vec<(f64, f64)> = distances.iter().zip(&norms).map(|(d, n)| (*d, n.ln())).collect();
    let (slope, intercept, residual) = if pts.len() >= 2 {
        least_squares(&pts)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(CtDecay {
        energy: e,
        e1,
        distances,
        norms,
        rate: -slope,
        intercept,
        residual,
        rate_ratio: -slope / (e1 - e),
    })
}

/// Constants of the initial-scale event; C₁ and C₂ come from resolvent
/// calibration and c′ from a fitted spectral-bottom tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlseConstants {
    pub c1: f64,
    pub c2: f64,
    pub c_prime: f64,
}

/// Box Λ_L (L = ℓ^κ), source B = centre cell, far set B̃ = cells with
/// |k|_∞ ≥ δ + 1 where δ = ⌈L/3⌉.
#[derive(Clone, Debug)]
pub struct IlseGeometry {
    pub ell: usize,
    pub kappa: u32,
    pub level: usize,
    pub setup: BoxSetup,
    pub source: Vec<usize>,
    pub far: CtTarget,
}

impl IlseGeometry {
    pub fn new(model: &PotentialModel, ell: usize, kappa: u32, n_h: usize) -> Result<Self> {
        if ell < 1 || kappa < 1 {
            return Err(Error::Domain("need ell >= 1 and kappa >= 1".into()));
        }
        let level = ell.pow(kappa);
        let dof = ((2 * level + 1) * n_h).pow(model.dim() as u32);
        if dof > DENSE_RESOLVENT_LIMIT {
            return Err(Error::Refused(format!(
                "L = {ell}^{kappa} = {level} gives {dof} unknowns (limit {DENSE_RESOLVENT_LIMIT}); try a smaller ell or kappa"
            )));
        }
        let setup = BoxSetup::new(model, level, n_h)?;
        let delta = level.div_ceil(3);
        let far_nodes: Vec<usize> = cell_shells(&setup.grid, level)
            .into_iter()
            .filter(|t| t.distance >= delta as f64)
            .flat_map(|t| t.nodes)
            .collect();
        if far_nodes.is_empty() {
            return Err(Error::Domain(format!("L = {level} has no cells at distance {delta}")));
        }
        Ok(IlseGeometry {
            ell,
            kappa,
            level,
            source: centre_cell(&setup.grid),
            far: CtTarget {
                distance: delta as f64,
                nodes: far_nodes,
            },
            setup,
        })
    }

    /// L^{−2/κ} = ℓ^{−2}
    pub fn scale(&self) -> f64 {
        (self.ell as f64).powi(-2)
    }

    pub fn energy(&self) -> f64 {
        self.setup.e0() + self.scale()
    }

    /// C₁L^{2/κ}exp(−C₂δL^{−2/κ})
    pub fn threshold(&self, c: &IlseConstants) -> f64 {
        c.c1 / self.scale() * (-c.c2 * self.far.distance * self.scale()).exp()
    }

    /// 1 − 2^d L^{(1−1/κ)d} exp(−c′L^{d/κ})
    pub fn lower_bound(&self, c: &IlseConstants) -> f64 {
        let d = self.setup.model.dim() as f64;
        let l = self.level as f64;
        let k = self.kappa as f64;
        1.0 - 2f64.powf(d) * l.powf((1.0 - 1.0 / k) * d) * (-c.c_prime * l.powf(d / k)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlseReport {
    pub ell: usize,
    pub kappa: u32,
    pub level: usize,
    pub energy: f64,
    pub distance: f64,
    pub threshold: f64,
    pub samples: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub interval: Interval,
    pub lower_bound: f64,
    /// Samples where E ≥ E₁(H^{L,D}); the raw norm is still tested.
    pub hypothesis_failures: usize,
    pub norms: Vec<f64>,
}

/// Frequency of ‖1_B(E₀ + L^{−2/κ} − H_ω^{L,D})⁻¹1_{B̃}‖ ≤ C₁L^{2/κ}exp(−C₂δL^{−2/κ}).
pub fn ilse_probability(
    model: &PotentialModel,
    ell: usize,
    kappa: u32,
    constants: &IlseConstants,
    n_h: usize,
    campaign: &Campaign,
) -> Result<IlseReport> {
    let geo = IlseGeometry::new(model, ell, kappa, n_h)?;
    let bc = geo.setup.bc(BcKind::Dirichlet)?;
    let energy = geo.energy();
    let threshold = geo.threshold(constants);
    let data = campaign.map(|i| {
        let h = geo.setup.sample(campaign.seed, i, &bc)?;
        let e1 = lowest_eigenpairs(&h.matrix, &SolverConfig::lowest(1))?.eigenvalues[0];
        let norm = resolvent_block_norms(&h, energy, &geo.source, std::slice::from_ref(&geo.far))?[0];
        Ok((norm, energy >= e1))
    })?;
    let hits = data.iter().filter(|d| d.0 <= threshold).count();
    Ok(IlseReport {
        ell,
        kappa,
        level: geo.level,
        energy,
        distance: geo.far.distance,
        threshold,
        samples: data.len(),
        hits,
        p_hat: hits as f64 / data.len().max(1) as f64,
        interval: wilson_interval(hits, data.len()),
        lower_bound: geo.lower_bound(constants),
        hypothesis_failures: data.iter().filter(|d| d.1).count(),
        norms: data.iter().map(|d| d.0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlseCalibration {
    pub constants: IlseConstants,
    /// Smallest rate/(E₁ − E) over the calibration fits.
    pub min_rate_ratio: f64,
    /// Wilson upper bound of P{E₁(H^{ℓ,M}) ≤ E₀ + 2ℓ⁻²}.
    pub small_box_tail: f64,
}

/// Envelope constants of the off-diagonal resolvent norms on calibration
/// samples: C₂ = min rate/g and C₁ = max ‖·‖·g·exp(C₂gδ) over energies
/// E₁ − g with g = f·L^{−2/κ}, f ∈ `fractions`; c′ from the ℓ-box tail.
pub fn calibrate_ilse(
    model: &PotentialModel,
    ell: usize,
    kappa: u32,
    n_h: usize,
    campaign: &Campaign,
    fractions: &[f64],
) -> Result<IlseCalibration> {
    let geo = IlseGeometry::new(model, ell, kappa, n_h)?;
    let bc = geo.setup.bc(BcKind::Dirichlet)?;
    let shells = cell_shells(&geo.setup.grid, geo.level);
    let fits = campaign.map(|i| {
        let h = geo.setup.sample(campaign.seed, i, &bc)?;
        let e1 = lowest_eigenpairs(&h.matrix, &SolverConfig { tol: 1e-10, ..SolverConfig::lowest(1) })?.eigenvalues[0];
        fractions
            .iter()
            .map(|&f| {
                let g = f * geo.scale();
                let norms = resolvent_block_norms(&h, e1 - g, &geo.source, &shells)?;
                let pts: Vec<(f64, f64)> = shells.iter().zip(&norms).map(|(t, n)| (t.distance, n.ln())).collect();
                Ok((g, norms, -least_squares(&pts).0))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let c2 = fits.iter().flatten().map(|(g, _, rate)| rate / g).fold(f64::INFINITY, f64::min);
    let c1 = fits
        .iter()
        .flatten()
        .flat_map(|(g, norms, _)| shells.iter().zip(norms).map(move |(t, n)| n * g * (c2 * g * t.distance).exp()))
        .fold(0.0, f64::max);
    let small = BoxSetup::with_ground(model, geo.setup.ground.clone(), ell)?;
    let mbc = small.bc(BcKind::Mezincescu)?;
    let cut = small.e0() + 2.0 / (ell * ell) as f64;
    let sub = campaign.child(0x11_5e);
    let hits = sub
        .map(|i| {
            let h = small.sample(sub.seed, i, &mbc)?;
            Ok(crate::eigensolve::count_at_most(&h.matrix, cut) >= 1)
        })?
        .into_iter()
        .filter(|&b| b)
        .count();
    let small_box_tail = wilson_interval(hits, sub.samples).hi;
    let c_prime = -small_box_tail.ln() / (ell as f64).powi(model.dim() as i32);
    Ok(IlseCalibration {
        constants: IlseConstants { c1, c2, c_prime },
        min_rate_ratio: c2,
        small_box_tail,
    })
}
