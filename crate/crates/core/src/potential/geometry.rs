use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice `M Z^d` with fundamental cell `D = M(-1/2, 1/2)^d`.
///
/// Points are handled in two coordinate systems: reference coordinates `y`
/// in which the lattice is `Z^d`, and physical coordinates `x = M y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometrySpec", into = "GeometrySpec")]
pub struct LatticeGeometry {
    dim: usize,
    m: DMatrix<f64>,
    m_inv: DMatrix<f64>,
    metric: DMatrix<f64>,
    det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub dimension: usize,
    /// Rows of M; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<Vec<f64>>>,
}

impl TryFrom<GeometrySpec> for LatticeGeometry {
    type Error = Error;
    fn try_from(s: GeometrySpec) -> Result<Self> {
        match s.generator {
            None => LatticeGeometry::cubic(s.dimension),
            Some(rows) => LatticeGeometry::new(rows),
        }
    }
}

impl From<LatticeGeometry> for GeometrySpec {
    fn from(g: LatticeGeometry) -> Self {
        let generator = if g.m == DMatrix::identity(g.dim, g.dim) {
            None
        } else {
            Some((0..g.dim).map(|i| (0..g.dim).map(|j| g.m[(i, j)]).collect()).collect())
        };
        GeometrySpec {
            dimension: g.dim,
            generator,
        }
    }
}

impl LatticeGeometry {
    pub fn cubic(dim: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(spacings: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(spacings)))
    }

    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Config("generator must be a square d×d matrix".into()));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_matrix(DMatrix::from_row_slice(d, d, &flat))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if !(1..=3).contains(&dim) || m.ncols() != dim {
            return Err(Error::Config(format!(
                "dimension must be 1, 2 or 3 with a square generator, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("generator entries must be finite".into()));
        }
        let det = m.determinant();
        if det.is_nan() || det <= 1e-12 {
            return Err(Error::Config(format!("generator must have positive determinant, got {det}")));
        }
        let m_inv = m.clone().try_inverse().ok_or_else(|| Error::Config("generator not invertible".into()))?;
        let metric = (m.transpose() * &m)
            .try_inverse()
            .ok_or_else(|| Error::Config("metric not invertible".into()))?;
        Ok(LatticeGeometry {
            dim,
            m,
            m_inv,
            metric,
            det,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// (MᵀM)⁻¹, the coefficient matrix of the Laplacian in reference coordinates.
    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.m[(i, j)] == 0.0))
    }

    /// |D|
    pub fn cell_volume(&self) -> f64 {
        self.det
    }

    /// |Λ_L| = det M · (2L+1)^d
    pub fn box_volume(&self, level: usize) -> f64 {
        self.det * ((2 * level + 1) as f64).powi(self.dim as i32)
    }

    /// |I_L| = (2L+1)^d
    pub fn box_sites(&self, level: usize) -> usize {
        (2 * level + 1).pow(self.dim as u32)
    }

    pub fn to_physical(&self, y: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.m[(i, j)] * y[j]).sum()).collect()
    }

    pub fn to_reference(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.m_inv[(i, j)] * x[j]).sum()).collect()
    }

    /// Per-axis reference-coordinate extent of a physical ball of radius `r`
    /// (in the sup norm of z this is Σ_j |M⁻¹_aj| r).
    pub fn reference_reach_of_ball(&self, r: f64) -> Vec<f64> {
        (0..self.dim).map(|a| (0..self.dim).map(|j| self.m_inv[(a, j)].abs()).sum::<f64>() * r).collect()
    }

    /// Per-axis reference extent of the physical box Π(−w_j, w_j).
    pub fn reference_reach_of_box(&self, half: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|a| (0..self.dim).map(|j| self.m_inv[(a, j)].abs() * half[j]).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_generators() {
        assert!(LatticeGeometry::new(vec![vec![1.0, 0.0], vec![0.0, -1.0]]).is_err());
        assert!(LatticeGeometry::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(LatticeGeometry::cubic(4).is_err());
    }

    #[test]
    fn volumes() {
        let g = LatticeGeometry::diagonal(&[2.0, 0.5, 3.0]).unwrap();
        assert!((g.det() - 3.0).abs() < 1e-14);
        assert!((g.box_volume(1) - 81.0).abs() < 1e-12);
        assert_eq!(g.box_sites(2), 125);
    }

    #[test]
    fn coordinates_round_trip() {
        let g = LatticeGeometry::new(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        let x = g.to_physical(&[0.3, -0.7]);
        let y = g.to_reference(&x);
        assert!((y[0] - 0.3).abs() < 1e-14 && (y[1] + 0.7).abs() < 1e-14);
        assert!(!g.is_diagonal());
    }

    #[test]
    fn serde_identity_generator_is_omitted() {
        let g = LatticeGeometry::cubic(2).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"dimension":2}"#);
        let back: LatticeGeometry = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
