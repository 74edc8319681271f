use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eigensolve::dense_eigenvalues;
use crate::error::{Error, Result};
use crate::operators::{assemble_hamiltonian, BoundaryCondition, BoxGrid};
use crate::potential::{evaluate_on_grid, BaseSet, CouplingLaw, LatticeGeometry, PotentialModel, Realization, SingleSitePotential, SiteBox};

/// ⟨ψ,Hψ⟩ − (‖Hψ‖² − ⟨ψ,Hψ⟩²)/(ν − ⟨ψ,Hψ⟩).
///
/// Requires ‖ψ‖ = 1 and ⟨ψ,Hψ⟩ < ν; the caller is responsible for ν ≤ E₂(H).
pub fn temple_lower_bound(h: &DMatrix<f64>, psi: &[f64], nu: f64) -> Result<f64> {
    let psi = DVector::from_column_slice(psi);
    if psi.len() != h.nrows() {
        return Err(Error::Shape {
            what: "trial vector",
            expected: h.nrows(),
            got: psi.len(),
        });
    }
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("trial vector must be normalized, norm {}", psi.norm())));
    }
    let hpsi = h * &psi;
    let m = psi.dot(&hpsi);
    if m >= nu {
        return Err(Error::HypothesisViolated(format!(
            "<psi, H psi> = {m} is not below nu = {nu}"
        )));
    }
    let var = hpsi.norm_squared() - m * m;
    Ok(m - var / (nu - m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TempleCertificate {
    pub value: Option<f64>,
    pub e1: f64,
    pub e2: f64,
    /// ⟨ψ,Hψ⟩ < ν ≤ E₂ (checked densely).
    pub hypothesis_holds: bool,
    /// value ≤ E₁ + slack whenever the hypothesis holds.
    pub holds: bool,
}

pub fn certify_temple(h: &DMatrix<f64>, psi: &[f64], nu: f64, slack: f64) -> Result<TempleCertificate> {
    let ev = dense_eigenvalues(h);
    let e1 = ev[0];
    let e2 = ev.get(1).copied().unwrap_or(f64::INFINITY);
    let value = match temple_lower_bound(h, psi, nu) {
        Ok(v) => Some(v),
        Err(Error::HypothesisViolated(_)) => None,
        Err(e) => return Err(e),
    };
    let hypothesis_holds = value.is_some() && nu <= e2 + slack;
    let holds = !hypothesis_holds || value.unwrap() <= e1 + slack;
    Ok(TempleCertificate {
        value,
        e1,
        e2,
        hypothesis_holds,
        holds,
    })
}

/// The flat ground state of a free Neumann box tested against a two-valued
/// breather potential: first and second moments and the Temple outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTemple {
    pub coupling: f64,
    /// ⟨ψ, Wψ⟩ = ⟨ψ, Hψ⟩
    pub first_moment: f64,
    /// ⟨ψ, W²ψ⟩ = ‖Hψ‖²
    pub second_moment: f64,
    pub e1: f64,
    pub e2: f64,
    /// Temple value at ν = E₂, or None when ⟨ψ,Hψ⟩ ≥ E₂.
    pub value: Option<f64>,
    pub hypothesis_violated: bool,
}

/// Build H = H^{L,N}_free + W with W = μ on the half cell of every site
/// (λ ≡ 1, d = 1) and evaluate Temple's inequality with ψ = flat ground state
/// of the free operator and ν = E₂(H).
pub fn temple_indicator_instance(level: usize, n_h: usize, coupling: f64) -> Result<IndicatorTemple> {
    let geometry = LatticeGeometry::cubic(1)?;
    let model = PotentialModel::iid(
        geometry.clone(),
        SingleSitePotential::standard(coupling, BaseSet::HalfCell),
        CouplingLaw::PointMass { value: 1.0 },
    );
    let sites = SiteBox::centered(1, level);
    let real = Realization::fixed(sites.clone(), vec![1.0; sites.len()])?;
    let grid = BoxGrid::for_sites(&sites, n_h)?;
    let w = evaluate_on_grid(&model, &real, &grid);
    let zero = vec![0.0; grid.dof()];
    let hm = assemble_hamiltonian(&geometry, &zero, &w, &grid, &BoundaryCondition::Neumann)?.matrix.to_dense();
    let n = grid.dof();
    let psi = vec![1.0 / (n as f64).sqrt(); n];
    let first_moment = psi.iter().zip(&w).map(|(p, v)| p * p * v).sum();
    let second_moment = psi.iter().zip(&w).map(|(p, v)| p * p * v * v).sum();
    let ev = dense_eigenvalues(&hm);
    let (e1, e2) = (ev[0], ev[1]);
    let (value, hypothesis_violated) = match temple_lower_bound(&hm, &psi, e2) {
        Ok(v) => (Some(v), false),
        Err(Error::HypothesisViolated(_)) => (None, true),
        Err(e) => return Err(e),
    };
    Ok(IndicatorTemple {
        coupling,
        first_moment,
        second_moment,
        e1,
        e2,
        value,
        hypothesis_violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ground_state_gives_exact_value() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = temple_lower_bound(&h, &[s, -s], 3.0).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_closed_form() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let th: f64 = 0.1;
        let (c, s) = (th.cos(), th.sin());
        let v = temple_lower_bound(&h, &[c, s], 1.0).unwrap();
        let m = s * s;
        let expected = m - (s * s - m * m) / (1.0 - m);
        assert!((v - expected).abs() < 1e-15);
        assert!(v <= 1e-15);
    }

    #[test]
    fn hypothesis_violation_is_an_error() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        assert!(matches!(temple_lower_bound(&h, &[0.0, 1.0], 1.0), Err(Error::HypothesisViolated(_))));
        assert!(matches!(temple_lower_bound(&h, &[1.0, 1.0], 1.0), Err(Error::Domain(_))));
    }
}
