use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::BoxGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineTerm {
    pub amplitude: f64,
    /// Integer frequency vector in reference coordinates.
    pub freq: Vec<i64>,
    #[serde(default)]
    pub phase: f64,
}

/// Lattice-periodic background Vper, given in reference coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PeriodicBackground {
    #[default]
    Zero,
    Constant { value: f64 },
    /// Σ a cos(2π f·y + φ)
    CosineSum { terms: Vec<CosineTerm> },
    /// Values on the unit-cell grid with `n_h` nodes per axis (axis 0 fastest).
    Table { n_h: usize, values: Vec<f64> },
}

impl PeriodicBackground {
    pub fn cosine(amplitude: f64) -> Self {
        PeriodicBackground::CosineSum {
            terms: vec![CosineTerm { amplitude, freq: vec![1], phase: 0.0 }],
        }
    }

    /// Vper at reference point y (tables are not point-evaluable).
    pub fn at(&self, y: &[f64]) -> Option<f64> {
        match self {
            PeriodicBackground::Zero => Some(0.0),
            PeriodicBackground::Constant { value } => Some(*value),
            PeriodicBackground::CosineSum { terms } => Some(
                terms
                    .iter()
                    .map(|t| {
                        let arg: f64 = t.freq.iter().zip(y).map(|(f, v)| *f as f64 * v).sum();
                        t.amplitude * (2.0 * std::f64::consts::PI * arg + t.phase).cos()
                    })
                    .sum(),
            ),
            PeriodicBackground::Table { .. } => None,
        }
    }

    /// Vper sampled on every node of `grid`.
    pub fn on_grid(&self, grid: &BoxGrid) -> Result<Vec<f64>> {
        match self {
            PeriodicBackground::Table { n_h, values } => {
                if *n_h != grid.n_h() {
                    return Err(Error::Shape {
                        what: "background table n_h",
                        expected: grid.n_h(),
                        got: *n_h,
                    });
                }
                let want = n_h.pow(grid.dim() as u32);
                if values.len() != want {
                    return Err(Error::Shape {
                        what: "background table length",
                        expected: want,
                        got: values.len(),
                    });
                }
                Ok((0..grid.dof()).map(|n| values[grid.cell_offset_index(n)]).collect())
            }
            _ => {
                // Evaluate on one cell and tile, so the grid function is exactly periodic.
                let cell = BoxGrid::unit_cell(grid.dim(), grid.n_h())?;
                let base: Vec<f64> = (0..cell.dof()).map(|n| self.at(&cell.node_coords(n)).unwrap()).collect();
                Ok((0..grid.dof()).map(|n| base[grid.cell_offset_index(n)]).collect())
            }
        }
    }

    /// An upper bound on ‖Vper‖_∞.
    pub fn sup_bound(&self) -> f64 {
        match self {
            PeriodicBackground::Zero => 0.0,
            PeriodicBackground::Constant { value } => value.abs(),
            PeriodicBackground::CosineSum { terms } => terms.iter().map(|t| t.amplitude.abs()).sum(),
            PeriodicBackground::Table { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn validate(&self, dim: usize) -> Vec<String> {
        let mut e = Vec::new();
        match self {
            PeriodicBackground::Zero => {}
            PeriodicBackground::Constant { value } => {
                if !value.is_finite() {
                    e.push("value: must be finite".into());
                }
            }
            PeriodicBackground::CosineSum { terms } => {
                for (i, t) in terms.iter().enumerate() {
                    if t.freq.len() != dim {
                        e.push(format!("terms[{i}].freq: need {dim} entries, got {}", t.freq.len()));
                    }
                    if !t.amplitude.is_finite() || !t.phase.is_finite() {
                        e.push(format!("terms[{i}]: amplitude and phase must be finite"));
                    }
                }
            }
            PeriodicBackground::Table { n_h, values } => {
                if *n_h < 2 {
                    e.push(format!("n_h: must be >= 2, got {n_h}"));
                } else if values.len() != n_h.pow(dim as u32) {
                    e.push(format!("values: need n_h^d = {} entries, got {}", n_h.pow(dim as u32), values.len()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    e.push("values: entries must be finite".into());
                }
            }
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_is_exactly_periodic_on_grid() {
        let g = BoxGrid::centered(1, 3, 16).unwrap();
        let v = PeriodicBackground::cosine(1.0).on_grid(&g).unwrap();
        for i in 0..g.dof() - 16 {
            assert_eq!(v[i].to_bits(), v[i + 16].to_bits());
        }
    }

    #[test]
    fn table_must_match_resolution() {
        let t = PeriodicBackground::Table { n_h: 4, values: vec![0.0; 4] };
        assert!(t.on_grid(&BoxGrid::centered(1, 1, 8).unwrap()).is_err());
        assert_eq!(t.on_grid(&BoxGrid::centered(1, 1, 4).unwrap()).unwrap().len(), 12);
    }
}
