use crate::sparse::CsrMatrix;

/// #{eigenvalues ≤ e} via Sylvester inertia of a banded LDLᵀ of A − e·I.
///
/// The interval is closed: the factorization is taken at e + δ with
/// δ = 1e-11·(1 + ‖A‖_G), so an eigenvalue within δ above e is counted.
/// Zero pivots are nudged to −tiny, which keeps the count of a nearby matrix.
pub fn count_at_most(a: &CsrMatrix, e: f64) -> usize {
    let n = a.dim();
    if n == 0 {
        return 0;
    }
    let scale = 1.0 + a.gershgorin_norm();
    let shift = e + 1e-11 * scale;
    let b = a.bandwidth();
    let w = b + 1;
    // band[i*w + (j - i + b)] holds A_ij for i-b <= j <= i
    let mut band = vec![0.0; n * w];
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j <= i {
                band[i * w + (j + b - i)] += v;
            }
        }
        band[i * w + b] -= shift;
    }
    // ld[i*w + (k - i + b)] = l_ik * d_k for k < i
    let mut ld = vec![0.0; n * w];
    let mut l = vec![0.0; n * w];
    let mut d = vec![0.0; n];
    let tiny = f64::EPSILON * scale;
    let mut negatives = 0;
    for i in 0..n {
        let j0 = i.saturating_sub(b);
        for j in j0..i {
            let mut s = band[i * w + (j + b - i)];
            let k0 = j0.max(j.saturating_sub(b));
            for k in k0..j {
                s -= ld[i * w + (k + b - i)] * l[j * w + (k + b - j)];
            }
            ld[i * w + (j + b - i)] = s;
            l[i * w + (j + b - i)] = s / d[j];
        }
        let mut di = band[i * w + b];
        for k in j0..i {
            di -= ld[i * w + (k + b - i)] * l[i * w + (k + b - i)];
        }
        if di == 0.0 {
            di = -tiny;
        }
        if di < 0.0 {
            negatives += 1;
        }
        d[i] = di;
    }
    negatives
}
