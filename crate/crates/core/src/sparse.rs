//! Compressed sparse row storage for symmetric operators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros produced by cancellation are kept out.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet index out of range");
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// A X for a column block X (n × m).
    pub fn mul_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut yc = y.column_mut(c);
            for i in 0..self.n {
                let mut s = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.vals[k] * xc[self.cols[k]];
                }
                yc[i] = s;
            }
        }
        y
    }

    /// Gershgorin enclosure [lo, hi] of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut d = 0.0;
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d += v;
                } else {
                    r += v.abs();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        if self.n == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// max(|lo|, |hi|) of the Gershgorin enclosure, a cheap bound on ‖A‖₂.
    pub fn gershgorin_norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// max |a_ij − a_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// max |i − j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                b = b.max(i.abs_diff(j));
            }
        }
        b
    }

    pub fn max_row_len(&self) -> usize {
        (0..self.n).map(|i| self.row_len(i)).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[(i, j)] += v;
            }
        }
        a
    }

    /// A + s·I
    pub fn add_identity(&self, s: f64) -> CsrMatrix {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push((i, j, v));
            }
            t.push((i, i, s));
        }
        CsrMatrix::from_triplets(self.n, t)
    }

    /// Bit-level fingerprint of the stored entries.
    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::harness::Fnv::new();
        h.write_u64(self.n as u64);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                h.write_u64(i as u64);
                h.write_u64(j as u64);
                h.write_u64(v.to_bits());
            }
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 2.0), (0, 0, 3.0), (1, 0, 2.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.max_asymmetry(), 0.0);
        assert_eq!(a.apply(&[1.0, 1.0]), vec![6.0, 2.0]);
    }

    #[test]
    fn gershgorin_of_laplacian() {
        let a = CsrMatrix::from_triplets(
            3,
            vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)],
        );
        assert_eq!(a.gershgorin(), (0.0, 4.0));
        assert_eq!(a.bandwidth(), 1);
    }
}
