use serde::{Deserialize, Serialize};

use super::sampling::{BoxSetup, Campaign};
use super::wilson::{wilson_interval, Interval};
use crate::eigensolve::{lowest_eigenpairs, SolverConfig};
use crate::error::{Error, Result};
use crate::operators::{BcKind, BoxGrid};
use crate::potential::PotentialModel;
use crate::sparse::CsrMatrix;

/// 6s⁵ − 15s⁴ + 10s³, the C² step from 0 to 1 on [0, 1].
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

/// Product cutoff χ(y) = Π_a f(|y_a|/r): f = 1 on [0, ½], 0 on [1, ∞), C²
/// in between. With r = L, χ = 1 on the cube of half-width L/2 (which
/// contains D for L ≥ 1) and vanishes on every boundary node of Λ_L.
pub fn smooth_cutoff(grid: &BoxGrid, radius: f64) -> Vec<f64> {
    (0..grid.dof())
        .map(|n| {
            grid.node_coords(n)
                .iter()
                .map(|y| 1.0 - smoothstep(2.0 * y.abs() / radius - 1.0))
                .product()
        })
        .collect()
}

fn quadratic_form(a: &CsrMatrix, x: &[f64]) -> f64 {
    a.apply(x).iter().zip(x).map(|(p, q)| p * q).sum()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Cutoff data of Λ_L that does not depend on ω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffEnergy {
    pub level: usize,
    /// ⟨χΨ, (H₀ − E₀)χΨ⟩/‖χΨ‖² with H₀ = −Δ + Vper under Dirichlet conditions.
    pub free_excess: f64,
    /// L²·(½Σ_{i≠j}|A_ij|(χ_i − χ_j)²/Σχ_i²)·(Ψ₊/Ψ₋)²
    pub cblubb: f64,
    #[serde(skip)]
    pub trial: Vec<f64>,
}

pub fn cutoff_energy(setup: &BoxSetup) -> Result<CutoffEnergy> {
    let level = setup.level();
    if level == 0 {
        return Err(Error::Domain("the cutoff needs L >= 1".into()));
    }
    let chi = smooth_cutoff(&setup.grid, level as f64);
    let psi = setup.ground.periodized(&setup.grid)?;
    let trial: Vec<f64> = chi.iter().zip(&psi).map(|(c, p)| c * p).collect();
    let zero = vec![0.0; setup.grid.dof()];
    let h0 = setup.hamiltonian(&zero, &setup.bc(BcKind::Dirichlet)?)?;
    let free_excess = quadratic_form(&h0.matrix, &trial) / norm2(&trial) - setup.e0();
    let mut grad = 0.0;
    for i in 0..h0.dof() {
        for (j, v) in h0.matrix.row(i) {
            if j != i {
                grad += 0.5 * v.abs() * (chi[i] - chi[j]).powi(2);
            }
        }
    }
    let ratio = setup.ground.psi_max / setup.ground.psi_min;
    let cblubb = (level * level) as f64 * grad / norm2(&chi) * ratio * ratio;
    Ok(CutoffEnergy {
        level,
        free_excess,
        cblubb,
        trial,
    })
}

/// Constants of the decay and probability conditions of the lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    /// C in |u(λ, x)| ≲ C(1+|x|)^{−d−ε}.
    pub c_decay: f64,
    pub epsilon: f64,
    /// α₀ and η of P{λ ≤ α} ≥ (α/α₀)^η-type conditions.
    pub alpha0: f64,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cblubb: Option<f64>,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            c_decay: 1.0,
            epsilon: 1.0,
            alpha0: 1.0,
            eta: 1.0,
            cblubb: None,
        }
    }
}

impl LowerBoundConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut e = Vec::new();
        if !(self.epsilon > 0.0) {
            e.push(format!("epsilon: must be in (0, inf), got {}", self.epsilon));
        }
        if !(self.eta > 0.0) {
            e.push(format!("eta: must be in (0, inf), got {}", self.eta));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            e.push(format!("alpha0: must be in (0, 1], got {}", self.alpha0));
        }
        if !(self.c_decay >= 0.0) {
            e.push(format!("c_decay: must be in [0, inf), got {}", self.c_decay));
        }
        e
    }

    pub fn check(&self) -> Result<()> {
        let e = self.validate();
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(e.join("; ")))
        }
    }

    /// ε̄ = min{2, ε}
    pub fn eps_bar(&self) -> f64 {
        self.epsilon.min(2.0)
    }

    /// L'_E = ⌈√(2·Cblubb/(E − E₀))⌉
    pub fn length(&self, cblubb: f64, offset: f64) -> Result<usize> {
        if !(offset > 0.0) {
            return Err(Error::Domain(format!("need E > E0, got E - E0 = {offset}")));
        }
        Ok((2.0 * self.cblubb.unwrap_or(cblubb) / offset).sqrt().ceil() as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSample {
    pub sample: u64,
    /// Rayleigh quotient of χΨ in H_ω^{L,D}.
    pub quotient: f64,
    /// ⟨χΨ, W_ω χΨ⟩/‖χΨ‖²
    pub potential_term: f64,
    /// quotient − E₀ ≤ potential_term + Cblubb/L² (slack 1e-8)
    pub decomposition_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub energy: f64,
    pub hits: usize,
    pub p_hat: f64,
    pub interval: Interval,
    /// p̂/|Λ_L|, a lower estimate of N(E).
    pub ids_lower: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub level: usize,
    pub volume: f64,
    pub e0: f64,
    pub cutoff: CutoffEnergy,
    pub samples: Vec<WitnessSample>,
    pub rows: Vec<WitnessRow>,
    pub decomposition_holds: bool,
}

pub const DECOMPOSITION_SLACK: f64 = 1e-8;

/// Rayleigh-quotient witnesses of {inf σ(H_ω^{L,D}) ≤ E}. Sample `i` uses the
/// realization of campaign seed `campaign.seed`, sample `i`, so counts from
/// [`ids_curve`](super::ids_curve) on the same campaign are matched.
pub fn lower_bound_witness(
    model: &PotentialModel,
    level: usize,
    energies: &[f64],
    n_h: usize,
    campaign: &Campaign,
) -> Result<WitnessReport> {
    let setup = BoxSetup::new(model, level, n_h)?;
    let cutoff = cutoff_energy(&setup)?;
    let bc = setup.bc(BcKind::Dirichlet)?;
    let e0 = setup.e0();
    let trial = &cutoff.trial;
    let tn = norm2(trial);
    let cterm = cutoff.cblubb / (level * level) as f64;
    let samples = campaign.map(|i| {
        let w = setup.w(&setup.realization(campaign.seed, i)?);
        let h = setup.hamiltonian(&w, &bc)?;
        let quotient = quadratic_form(&h.matrix, trial) / tn;
        let potential_term = trial.iter().zip(&w).map(|(t, v)| t * t * v).sum::<f64>() / tn;
        Ok(WitnessSample {
            sample: i,
            quotient,
            potential_term,
            decomposition_holds: quotient - e0 <= potential_term + cterm + DECOMPOSITION_SLACK,
        })
    })?;
    let volume = setup.volume();
    let rows = energies
        .iter()
        .map(|&energy| {
            let hits = samples.iter().filter(|s| s.quotient <= energy).count();
            let p_hat = hits as f64 / samples.len().max(1) as f64;
            WitnessRow {
                energy,
                hits,
                p_hat,
                interval: wilson_interval(hits, samples.len()),
                ids_lower: p_hat / volume,
            }
        })
        .collect();
    Ok(WitnessReport {
        level,
        volume,
        e0,
        decomposition_holds: samples.iter().all(|s| s.decomposition_holds),
        cutoff,
        samples,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct E0Row {
    pub level: usize,
    pub alpha: f64,
    pub samples: usize,
    /// Samples with sup_{k ∈ I_L} λ_k ≤ α.
    pub hits: usize,
    pub p_hat: f64,
    pub interval: Interval,
    /// Π_k P{λ_k ≤ α}
    pub exact: f64,
    /// Mean and max over event samples of ⟨ψ_{0,L}, H_ω ψ_{0,L}⟩ − E₀.
    pub rayleigh_mean: Option<f64>,
    pub rayleigh_max: Option<f64>,
    /// min over all samples of E₁(H_ω^{L,M}) − E₀.
    pub min_e1_offset: f64,
    /// (Cperp + 1)/L
    pub bound: f64,
    /// No sample realized the event.
    pub unresolved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct E0Report {
    pub e0: f64,
    pub cperp: f64,
    pub rows: Vec<E0Row>,
}

/// Rayleigh quotients of ψ_{0,L} = Ψχ_L/‖Ψχ_L‖ on the event that all
/// couplings in I_L are at most α, together with the observed spectral
/// bottoms. `cperp` defaults to the largest Cblubb over the levels.
pub fn e0_identification(
    model: &PotentialModel,
    levels: &[usize],
    alphas: &[f64],
    n_h: usize,
    campaign: &Campaign,
    cperp: Option<f64>,
) -> Result<E0Report> {
    if levels.is_empty() || alphas.is_empty() {
        return Err(Error::Domain("need at least one level and one alpha".into()));
    }
    let mut setups = Vec::with_capacity(levels.len());
    for &l in levels {
        let s = BoxSetup::new(model, l, n_h)?;
        let c = cutoff_energy(&s)?;
        setups.push((s, c));
    }
    let cperp = cperp.unwrap_or_else(|| setups.iter().map(|(_, c)| c.cblubb).fold(0.0, f64::max));
    let e0 = setups[0].0.e0();
    let mut rows = Vec::new();
    for (setup, cutoff) in &setups {
        let level = setup.level();
        let sub = campaign.child(level as u64);
        let dir = setup.bc(BcKind::Dirichlet)?;
        let mez = setup.bc(BcKind::Mezincescu)?;
        let tn = norm2(&cutoff.trial);
        // (max λ, Rayleigh excess, E₁^M − E₀) per sample
        let data = sub.map(|i| {
            let real = setup.realization(sub.seed, i)?;
            let w = setup.w(&real);
            let rq = quadratic_form(&setup.hamiltonian(&w, &dir)?.matrix, &cutoff.trial) / tn - e0;
            let hm = setup.hamiltonian(&w, &mez)?;
            let e1 = lowest_eigenpairs(&hm.matrix, &SolverConfig::lowest(1))?.eigenvalues[0];
            Ok((real.lambdas.iter().cloned().fold(0.0, f64::max), rq, e1 - e0))
        })?;
        let min_e1_offset = data.iter().map(|d| d.2).fold(f64::INFINITY, f64::min);
        for &alpha in alphas {
            let event: Vec<f64> = data.iter().filter(|d| d.0 <= alpha).map(|d| d.1).collect();
            let hits = event.len();
            let exact = (0..setup.sites.len()).map(|j| model.law_for(j).cdf(alpha)).product();
            rows.push(E0Row {
                level,
                alpha,
                samples: data.len(),
                hits,
                p_hat: hits as f64 / data.len().max(1) as f64,
                interval: wilson_interval(hits, data.len()),
                exact,
                rayleigh_mean: (hits > 0).then(|| event.iter().sum::<f64>() / hits as f64),
                rayleigh_max: (hits > 0).then(|| event.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
                min_e1_offset,
                bound: (cperp + 1.0) / level as f64,
                unresolved: hits == 0,
            });
        }
    }
    Ok(E0Report { e0, cperp, rows })
}
