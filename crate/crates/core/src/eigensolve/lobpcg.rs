use nalgebra::DMatrix;
use rand::Rng;

use super::{dense_eigen, Method, SolverConfig, SpectralResult};
use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::CsrMatrix;

/// Orthonormalize the columns of `s` in place by two passes of modified
/// Gram–Schmidt, dropping columns that become numerically dependent.
fn orthonormalize(s: DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let mut kept: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(s.ncols());
    for c in 0..s.ncols() {
        let mut v = s.column(c).into_owned();
        let orig = v.norm();
        if orig == 0.0 || !orig.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for q in &kept {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-10 * orig {
            kept.push(v / nv);
        }
    }
    let mut out = DMatrix::zeros(n, kept.len());
    for (c, q) in kept.iter().enumerate() {
        out.set_column(c, q);
    }
    out
}

fn rayleigh_ritz(s: &DMatrix<f64>, as_: &DMatrix<f64>, m: usize) -> (Vec<f64>, DMatrix<f64>) {
    let g = s.transpose() * as_;
    let eig = dense_eigen(&g);
    let m = m.min(eig.eigenvalues.len());
    let c = eig.eigenvectors.expect("dense eigenvectors").columns(0, m).into_owned();
    (eig.eigenvalues[..m].to_vec(), c)
}

pub(super) fn solve(a: &CsrMatrix, cfg: &SolverConfig) -> Result<SpectralResult> {
    let n = a.dim();
    let k = cfg.k;
    let m = cfg.block.unwrap_or(k + (k / 2).max(2)).clamp(k, n);
    let norm_a = a.gershgorin_norm();
    let (lo, _) = a.gershgorin();
    let sigma = lo - 1e-3 * (1.0 + lo.abs());
    let precond: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / (d - sigma)).collect();

    let mut rng = seed::stream(&[cfg.seed, n as u64, m as u64]);
    let x0 = DMatrix::from_fn(n, m, |_, _| rng.gen::<f64>() - 0.5);
    let mut x = orthonormalize(x0);
    if x.ncols() < m {
        return Err(Error::Domain("could not build an independent starting block".into()));
    }
    let mut p: Option<DMatrix<f64>> = None;
    let mut residuals = vec![f64::INFINITY; k];

    for it in 1..=cfg.max_iter {
        let ax = a.mul_block(&x);
        let (theta, c) = rayleigh_ritz(&x, &ax, m);
        x = &x * &c;
        let ax = &ax * &c;
        let mut r = ax.clone();
        for j in 0..x.ncols() {
            let xj = x.column(j) * theta[j];
            let mut rj = r.column_mut(j);
            rj -= xj;
        }
        let norms: Vec<f64> = (0..x.ncols()).map(|j| r.column(j).norm()).collect();
        residuals = norms[..k].to_vec();
        let done = (0..k).all(|j| norms[j] <= cfg.tol * (theta[j].abs() + norm_a));
        if done {
            return Ok(SpectralResult {
                eigenvalues: theta[..k].to_vec(),
                residuals,
                eigenvectors: Some(x.columns(0, k).into_owned()),
                iterations: it,
                method: Method::Iterative,
                complete: k == n,
            });
        }
        let mut w = r;
        for (i, t) in precond.iter().enumerate() {
            for j in 0..w.ncols() {
                w[(i, j)] *= t;
            }
        }
        let extra = p.as_ref().map_or(0, |p| p.ncols());
        let mut s = DMatrix::zeros(n, x.ncols() + w.ncols() + extra);
        s.columns_mut(0, x.ncols()).copy_from(&x);
        s.columns_mut(x.ncols(), w.ncols()).copy_from(&w);
        if let Some(p) = &p {
            s.columns_mut(x.ncols() + w.ncols(), extra).copy_from(p);
        }
        let s = orthonormalize(s);
        let as_ = a.mul_block(&s);
        let (_, cs) = rayleigh_ritz(&s, &as_, m);
        let x_new = &s * &cs;
        let overlap = x.transpose() * &x_new;
        p = Some(&x_new - &x * overlap);
        x = orthonormalize(x_new);
        if x.ncols() < m {
            return Err(Error::NotConverged {
                iterations: it,
                residuals,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residuals,
    })
}
