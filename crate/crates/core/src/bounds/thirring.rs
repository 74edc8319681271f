use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eigensolve::{dense_eigen, dense_eigenvalues};
use crate::error::{Error, Result};

/// A small symmetric H with its ground pair and second eigenvalue, plus a
/// positive diagonal perturbation V.
#[derive(Clone, Debug)]
pub struct ThirringInput {
    pub h: DMatrix<f64>,
    pub e1: f64,
    pub e2: f64,
    pub psi: DVector<f64>,
    pub v: Vec<f64>,
}

impl ThirringInput {
    /// Diagonalize `h` densely and attach `v`.
    pub fn new(h: DMatrix<f64>, v: Vec<f64>) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() != v.len() || v.is_empty() {
            return Err(Error::Shape {
                what: "diagonal of V",
                expected: h.nrows(),
                got: v.len(),
            });
        }
        if let Some(bad) = v.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("V must be positive definite, found diagonal entry {bad}")));
        }
        let eig = dense_eigen(&h);
        let psi = eig.eigenvectors.as_ref().expect("dense eigenvectors").column(0).into_owned();
        Ok(ThirringInput {
            e1: eig.eigenvalues[0],
            e2: eig.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY),
            psi,
            h,
            v,
        })
    }
}

/// min{E₁ + ⟨ψ, V⁻¹ψ⟩⁻¹, E₂}
pub fn thirring_corollary_bound(input: &ThirringInput) -> Result<f64> {
    if input.v.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("V must be positive definite".into()));
    }
    let inner: f64 = input.psi.iter().zip(&input.v).map(|(p, v)| p * p / v).sum();
    Ok((input.e1 + 1.0 / inner).min(input.e2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThirringCertificate {
    pub bound: f64,
    /// E₁(H + V), dense.
    pub e1_perturbed: f64,
    pub holds: bool,
}

pub fn certify_thirring_corollary(input: &ThirringInput, slack: f64) -> Result<ThirringCertificate> {
    let bound = thirring_corollary_bound(input)?;
    let hv = &input.h + DMatrix::from_diagonal(&DVector::from_column_slice(&input.v));
    let e1_perturbed = dense_eigenvalues(&hv)[0];
    Ok(ThirringCertificate {
        bound,
        e1_perturbed,
        holds: bound <= e1_perturbed + slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCertificate {
    /// Smallest eigenvalue of V − Q(QᵀV⁻¹Q)⁻¹Qᵀ.
    pub min_eig_difference: f64,
    /// max_n [E_n(H + T) − E_n(H + V)].
    pub max_eigenvalue_excess: f64,
    pub holds: bool,
}

/// Certify P*(PV⁻¹P*)⁻¹P ≤ V and the resulting eigenvalue ordering, where
/// the projection is onto the span of the columns of `q` (orthonormal).
pub fn thirring_projection_bound(h: &DMatrix<f64>, v: &[f64], q: &DMatrix<f64>, slack: f64) -> Result<ProjectionCertificate> {
    let n = h.nrows();
    if v.len() != n || q.nrows() != n {
        return Err(Error::Shape {
            what: "projection dimension",
            expected: n,
            got: q.nrows(),
        });
    }
    if v.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("V must be positive definite".into()));
    }
    let vinv = DMatrix::from_diagonal(&DVector::from_iterator(n, v.iter().map(|x| 1.0 / x)));
    let compressed = q.transpose() * &vinv * q;
    let cond_scale = compressed.norm().max(f64::MIN_POSITIVE);
    let ev = dense_eigenvalues(&compressed);
    if ev.first().map_or(true, |&m| m <= 1e-13 * cond_scale) {
        return Err(Error::Domain("P V⁻¹ P* is singular on the range of P".into()));
    }
    let inv = compressed
        .try_inverse()
        .ok_or_else(|| Error::Domain("P V⁻¹ P* is singular on the range of P".into()))?;
    let t = q * inv * q.transpose();
    let vm = DMatrix::from_diagonal(&DVector::from_column_slice(v));
    let min_eig_difference = dense_eigenvalues(&(&vm - &t))[0];
    let with_t = dense_eigenvalues(&(h + &t));
    let with_v = dense_eigenvalues(&(h + &vm));
    let max_eigenvalue_excess = with_t.iter().zip(&with_v).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
    Ok(ProjectionCertificate {
        min_eig_difference,
        max_eigenvalue_excess,
        holds: min_eig_difference >= -slack && max_eigenvalue_excess <= slack,
    })
}
