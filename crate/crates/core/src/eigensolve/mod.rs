//! Low-lying spectra of sparse symmetric operators.
//!
//! `lowest_eigenpairs` runs a blocked, Jacobi-preconditioned Rayleigh-quotient
//! minimization (LOBPCG form) above the dense cutoff and the dense symmetric
//! eigensolver below it. `count_at_most` counts eigenvalues through the
//! inertia of a banded LDLᵀ factorization, which is what the Monte Carlo
//! campaigns use: they need `#{E_j ≤ E}`, not the eigenvalues themselves.

mod inertia;
mod lobpcg;

pub use inertia::count_at_most;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Iterative,
    Dense,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// ‖Hv − λv‖₂ per pair.
    pub residuals: Vec<f64>,
    /// Unit eigenvectors as columns, when kept.
    pub eigenvectors: Option<DMatrix<f64>>,
    pub iterations: usize,
    pub method: Method,
    /// True when `eigenvalues` is the whole spectrum.
    pub complete: bool,
}

impl SpectralResult {
    pub fn shifted(&self, gamma: f64) -> SpectralResult {
        let mut s = self.clone();
        s.eigenvalues.iter_mut().for_each(|v| *v -= gamma);
        s
    }

    pub fn lowest(&self) -> f64 {
        self.eigenvalues[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k: usize,
    /// Relative residual: ‖r‖ ≤ tol·(|λ| + ‖H‖_Gershgorin).
    pub tol: f64,
    pub max_iter: usize,
    /// Block size; defaults to k + max(2, k/2), capped by the dimension.
    pub block: Option<usize>,
    /// Problems with at most this many unknowns go to the dense solver.
    pub dense_cutoff: usize,
    /// Key of the starting-block stream.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 1,
            tol: 1e-8,
            max_iter: 20_000,
            block: None,
            dense_cutoff: 2000,
            seed: 0x5EED,
        }
    }
}

impl SolverConfig {
    pub fn lowest(k: usize) -> Self {
        SolverConfig { k, ..Self::default() }
    }

    pub fn iterative_only(mut self) -> Self {
        self.dense_cutoff = 0;
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::Domain(format!("need 1 <= k <= dof = {n}, got k = {}", self.k)));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(Error::Domain(format!("tol must be in (0, 1e-2), got {}", self.tol)));
        }
        Ok(())
    }
}

/// The `k` lowest eigenpairs of the symmetric matrix `a`.
pub fn lowest_eigenpairs(a: &CsrMatrix, cfg: &SolverConfig) -> Result<SpectralResult> {
    let n = a.dim();
    cfg.check(n)?;
    if n <= cfg.dense_cutoff {
        let mut full = dense_eigen(&a.to_dense());
        full.eigenvalues.truncate(cfg.k);
        full.residuals.truncate(cfg.k);
        full.complete = cfg.k == n;
        if let Some(v) = full.eigenvectors.take() {
            full.eigenvectors = Some(v.columns(0, cfg.k).into_owned());
        }
        return Ok(full);
    }
    lobpcg::solve(a, cfg)
}

/// Full spectrum; refuses above the dense cutoff.
pub fn dense_spectrum(a: &CsrMatrix, cutoff: usize) -> Result<SpectralResult> {
    if a.dim() > cutoff {
        return Err(Error::Refused(format!(
            "dense spectrum of {} unknowns exceeds the cutoff {cutoff}",
            a.dim()
        )));
    }
    Ok(dense_eigen(&a.to_dense()))
}

/// Full eigendecomposition of a dense symmetric matrix, ascending.
pub fn dense_eigen(a: &DMatrix<f64>) -> SpectralResult {
    let n = a.nrows();
    let sym = 0.5 * (a + a.transpose());
    let eig = SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    let hv = &sym * &vecs;
    let residuals = (0..n).map(|c| (hv.column(c) - vecs.column(c) * values[c]).norm()).collect();
    SpectralResult {
        eigenvalues: values,
        residuals,
        eigenvectors: Some(vecs),
        iterations: 0,
        method: Method::Dense,
        complete: true,
    }
}

/// Eigenvalues only of a dense symmetric matrix, ascending.
pub fn dense_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = 0.5 * (a + a.transpose());
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// n(E) = #{eigenvalues ≤ E}.
pub fn counting_function(spec: &SpectralResult, e: f64) -> Result<usize> {
    let count = spec.eigenvalues.iter().take_while(|&&v| v <= e).count();
    if spec.complete || count < spec.eigenvalues.len() {
        Ok(count)
    } else {
        Err(Error::Unresolved {
            energy: e,
            computed: spec.eigenvalues.len(),
            largest: spec.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY),
        })
    }
}

/// N(E) = n(E)/|Λ|.
pub fn normalized_counting(spec: &SpectralResult, e: f64, volume: f64) -> Result<f64> {
    Ok(counting_function(spec, e)? as f64 / volume)
}
