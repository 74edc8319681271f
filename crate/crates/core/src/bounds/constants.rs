use serde::{Deserialize, Serialize};

use crate::eigensolve::{lowest_eigenpairs, SolverConfig};
use crate::error::{Error, Result};
use crate::operators::{assemble_hamiltonian, mezincescu_coefficients, periodic_ground_state, BoundaryCondition, BoxGrid};
use crate::potential::{LatticeGeometry, PeriodicBackground};

/// Constants of the tail estimate, derived from an empirical gap constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofConstants {
    pub cgap: f64,
    /// Non-degeneracy level μ (coupling of the two-valued reduction).
    pub mu: f64,
    /// Lower bound on the means E[X_k] (or E[X₀] itself for the i.i.d. case).
    pub beta: f64,
    /// Replaces Cgap·β/8 when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_override: Option<f64>,
}

impl ProofConstants {
    pub fn new(cgap: f64, mu: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("cgap", cgap), ("mu", mu), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if beta > 1.0 {
            return Err(Error::Domain(format!("beta must be in (0, 1], got {beta}")));
        }
        Ok(ProofConstants {
            cgap,
            mu,
            beta,
            delta_override: None,
        })
    }

    /// β = Ψ₋²μ² from the ground-state minimum and non-degeneracy level.
    pub fn from_ground_state(cgap: f64, mu: f64, psi_min: f64) -> Result<Self> {
        Self::new(cgap, mu, (psi_min * psi_min * mu * mu).min(1.0))
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta_override = Some(delta);
        self
    }

    /// γ_L = Cgap/(2L²)
    pub fn gamma(&self, level: usize) -> f64 {
        self.cgap / (2.0 * (level as f64).powi(2))
    }

    /// L₀ = ⌈√(Cgap/(2μ))⌉, the smallest L with γ_L ≤ μ.
    pub fn l0(&self) -> usize {
        (self.cgap / (2.0 * self.mu)).sqrt().ceil() as usize
    }

    /// δ = Cgap·β/8 unless overridden.
    pub fn delta(&self) -> f64 {
        self.delta_override.unwrap_or(self.cgap * self.beta / 8.0)
    }

    /// L_E = ⌊√(δ/(E − E₀))⌋; out of regime when below max(1, L₀).
    pub fn critical_length(&self, e: f64, e0: f64) -> Result<usize> {
        let l = length_from_delta(self.delta(), e - e0)?;
        let floor = self.l0().max(1);
        if l < floor {
            return Err(Error::OutOfRegime(format!(
                "L_E = {l} < max(1, L0) = {floor} at E - E0 = {}",
                e - e0
            )));
        }
        Ok(l)
    }

    /// β²δ^{d/2}/16, the rate of exp(−C(E−E₀)^{−d/2}).
    pub fn tail_rate(&self, dim: usize) -> f64 {
        self.beta * self.beta * self.delta().powf(dim as f64 / 2.0) / 16.0
    }

    pub fn tail_bound(&self, offset: f64, dim: usize) -> f64 {
        (-self.tail_rate(dim) * offset.powf(-(dim as f64) / 2.0)).exp()
    }
}

fn length_from_delta(delta: f64, offset: f64) -> Result<usize> {
    if !(offset > 0.0) {
        return Err(Error::Domain(format!("need E > E0, got E - E0 = {offset}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("need positive constants, got delta = {delta}")));
    }
    // Relative guard so that values like √(0.08/0.08) landing a few ulps
    // below an integer still floor to that integer.
    Ok(((delta / offset).sqrt() * (1.0 + 1e-12)).floor() as usize)
}

/// L_E = ⌊√(Cgap·β/(8(E − E₀)))⌋, erroring when it is 0.
pub fn critical_length(e: f64, e0: f64, cgap: f64, beta: f64) -> Result<usize> {
    let l = length_from_delta(cgap * beta / 8.0, e - e0)?;
    if l < 1 {
        return Err(Error::OutOfRegime(format!("L_E = 0 at E - E0 = {}", e - e0)));
    }
    Ok(l)
}

/// ⌊√(Cgap/(2(E − E₀)))⌋, the largest L whose shift γ_L still exceeds E − E₀.
pub fn critical_length_upper(e: f64, e0: f64, cgap: f64) -> Result<usize> {
    length_from_delta(cgap / 2.0, e - e0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub level: usize,
    pub e1: f64,
    pub e2: f64,
    pub gap: f64,
    /// L²·(E₂ − E₁)
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub e0: f64,
    /// min over L of L²·(E₂ − E₁)
    pub cgap: f64,
    /// Least-squares slope of ln(gap) against ln L (NaN with fewer than 2 levels).
    pub slope: f64,
    pub rows: Vec<GapRow>,
}

/// Gap of the Mezincescu operator Hper^{L,M} over the given box levels.
pub fn gap_constant(geometry: &LatticeGeometry, background: &PeriodicBackground, n_h: usize, levels: &[usize]) -> Result<GapEstimate> {
    if levels.is_empty() {
        return Err(Error::Domain("need at least one box level".into()));
    }
    let ground = periodic_ground_state(geometry, background, n_h)?;
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        if level == 0 {
            return Err(Error::Domain("box levels must be >= 1".into()));
        }
        let grid = BoxGrid::centered(geometry.dim(), level, n_h)?;
        let vper = background.on_grid(&grid)?;
        let zero = vec![0.0; grid.dof()];
        let bc = BoundaryCondition::Mezincescu(mezincescu_coefficients(&ground, &grid)?);
        let h = assemble_hamiltonian(geometry, &vper, &zero, &grid, &bc)?;
        let spec = lowest_eigenpairs(&h.matrix, &SolverConfig { tol: 1e-10, ..SolverConfig::lowest(2) })?;
        let (e1, e2) = (spec.eigenvalues[0], spec.eigenvalues[1]);
        let gap = e2 - e1;
        rows.push(GapRow {
            level,
            e1,
            e2,
            gap,
            scaled: (level * level) as f64 * gap,
        });
    }
    let cgap = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.level as f64).ln(), r.gap.ln())).collect();
    let slope = if pts.len() >= 2 {
        crate::spectral_stats::least_squares(&pts).0
    } else {
        f64::NAN
    };
    Ok(GapEstimate {
        e0: ground.e0,
        cgap,
        slope,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_length_formula() {
        assert_eq!(critical_length(1.01, 1.0, 2.0, 0.04).unwrap(), 1);
        assert!(critical_length(1.5, 1.0, 2.0, 0.04).is_err());
        assert!(matches!(critical_length(1.0, 1.0, 2.0, 0.04), Err(Error::Domain(_))));
    }

    #[test]
    fn constants_derived_quantities() {
        let c = ProofConstants::new(2.4, 0.3, 0.5).unwrap();
        assert!((c.gamma(2) - 0.3).abs() < 1e-15);
        assert_eq!(c.l0(), 2);
        assert!((c.delta() - 0.15).abs() < 1e-15);
        assert!(c.critical_length(0.05, 0.0).is_err());
        assert_eq!(c.critical_length(0.01, 0.0).unwrap(), 3);
        assert_eq!(c.clone().with_delta(4.0).critical_length(1.0, 0.0).unwrap(), 2);
    }
}
