use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{BoxGrid, PeriodicGroundState};
use crate::potential::{single_site_on_cell, PotentialModel, Realization};

/// X = ∫_{supp u(λ,·) ∩ D} Ψ² for one coupling value.
pub fn x_for_lambda(psi: &PeriodicGroundState, model: &PotentialModel, lambda: f64) -> Result<f64> {
    let u = single_site_on_cell(model, lambda, psi.n_h)?;
    Ok(u.iter().zip(&psi.psi).filter(|(v, _)| **v > 0.0).map(|(_, p)| p * p).sum::<f64>() * psi.node_weight)
}

/// X_k for site `k` of the realization.
pub fn xk_statistic(psi: &PeriodicGroundState, model: &PotentialModel, realization: &Realization, k: &[i64]) -> Result<f64> {
    let lambda = realization
        .lambda_at(k)
        .ok_or_else(|| Error::Domain(format!("site {k:?} is not in the realization")))?;
    x_for_lambda(psi, model, lambda)
}

/// S = |I|⁻¹ Σ_k X_k over all sites of the realization.
pub fn s_average(psi: &PeriodicGroundState, model: &PotentialModel, realization: &Realization) -> Result<f64> {
    let mut s = 0.0;
    for &lambda in &realization.lambdas {
        s += x_for_lambda(psi, model, lambda)?;
    }
    Ok(s / realization.lambdas.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XsvBound {
    /// (γ_L/2)·S_L
    pub lhs: f64,
    /// E₁(H₀^L) + ⟨Ψ_L, V⁻¹Ψ_L⟩⁻¹
    pub rhs: f64,
    /// ⟨Ψ_L, V⁻¹Ψ_L⟩ by grid quadrature
    pub inner_quadrature: f64,
    /// S/(μ+γ) + (1−S)/γ, when W only takes the values 0 and μ
    pub inner_closed_form: Option<f64>,
    pub holds: bool,
}

/// Check (γ_L/2)·S_L ≤ E₁(H₀^L) + ⟨Ψ_L, (W+γ_L)⁻¹Ψ_L⟩⁻¹ on one box.
///
/// `w` is W_ω on `grid` (a centred box Λ_L); Ψ_L is the periodized ground
/// state normalized on the box.
#[allow(clippy::too_many_arguments)]
pub fn xsv_eigenvalue_bound(
    e1_h0: f64,
    psi: &PeriodicGroundState,
    grid: &BoxGrid,
    w: &[f64],
    gamma: f64,
    mu: f64,
    s_l: f64,
    l0: usize,
    slack: f64,
) -> Result<XsvBound> {
    let level = grid.level().ok_or_else(|| Error::Domain("grid must be a centred box".into()))?;
    if level < l0 || gamma > mu {
        return Err(Error::OutOfRegime(format!("L = {level} below L0 = {l0} (gamma {gamma} vs mu {mu})")));
    }
    if w.len() != grid.dof() {
        return Err(Error::Shape {
            what: "W grid function",
            expected: grid.dof(),
            got: w.len(),
        });
    }
    let sites = grid.num_cells() as f64;
    let psi_l = psi.periodized(grid)?;
    let inner_quadrature: f64 =
        psi_l.iter().zip(w).map(|(p, v)| p * p / (v + gamma)).sum::<f64>() * psi.node_weight / sites;
    let two_valued = w.iter().all(|&v| v == 0.0 || (v - mu).abs() <= 1e-12 * mu);
    let inner_closed_form = two_valued.then(|| s_l / (mu + gamma) + (1.0 - s_l) / gamma);
    let inner = inner_closed_form.unwrap_or(inner_quadrature);
    let lhs = 0.5 * gamma * s_l;
    let rhs = e1_h0 + 1.0 / inner;
    Ok(XsvBound {
        lhs,
        rhs,
        inner_quadrature,
        inner_closed_form,
        holds: lhs <= rhs + slack,
    })
}

/// γ·μS/(μ + γ − μS), the value of −γ + ⟨Ψ_L,V⁻¹Ψ_L⟩⁻¹ for a two-valued potential.
pub fn xsv_closed_form(gamma: f64, mu: f64, s: f64) -> f64 {
    gamma * mu * s / (mu + gamma - mu * s)
}
