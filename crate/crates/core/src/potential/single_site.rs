use serde::{Deserialize, Serialize};

use super::geometry::LatticeGeometry;
use crate::error::{Error, Result};

/// Open base set `A`; the breather places `μ` on `λA`.
///
/// `Ball`, `AxisBox` and `Rect` live in physical coordinates. `Cell` is the
/// fundamental domain `D` and `HalfCell` is `M(−¼, ¼)^d`; both are tested in
/// reference coordinates so they follow the lattice shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum BaseSet {
    Ball { radius: f64 },
    AxisBox { half_widths: Vec<f64> },
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    Cell,
    HalfCell,
}

impl BaseSet {
    /// Is `z` in `λA`?
    pub fn contains(&self, lambda: f64, z_ref: &[f64], z_phys: &[f64]) -> bool {
        if lambda <= 0.0 {
            return false;
        }
        match self {
            BaseSet::Ball { radius } => z_phys.iter().map(|v| v * v).sum::<f64>().sqrt() < lambda * radius,
            BaseSet::AxisBox { half_widths } => z_phys.iter().zip(half_widths).all(|(z, w)| z.abs() < lambda * w),
            BaseSet::Rect { lo, hi } => z_phys
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(z, (l, h))| *z > lambda * l && *z < lambda * h),
            BaseSet::Cell => z_ref.iter().all(|y| y.abs() < 0.5 * lambda),
            BaseSet::HalfCell => z_ref.iter().all(|y| y.abs() < 0.25 * lambda),
        }
    }

    fn reach(&self, lambda: f64, g: &LatticeGeometry) -> Vec<f64> {
        let d = g.dim();
        match self {
            BaseSet::Ball { radius } => g.reference_reach_of_ball(lambda * radius),
            BaseSet::AxisBox { half_widths } => {
                let w: Vec<f64> = half_widths.iter().map(|w| w * lambda).collect();
                g.reference_reach_of_box(&w)
            }
            BaseSet::Rect { lo, hi } => {
                let w: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| l.abs().max(h.abs()) * lambda).collect();
                g.reference_reach_of_box(&w)
            }
            BaseSet::Cell => vec![0.5 * lambda; d],
            BaseSet::HalfCell => vec![0.25 * lambda; d],
        }
    }

    fn validate(&self, dim: usize) -> Vec<String> {
        let mut e = Vec::new();
        match self {
            BaseSet::Ball { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    e.push(format!("radius: must be in (0, inf), got {radius}"));
                }
            }
            BaseSet::AxisBox { half_widths } => {
                if half_widths.len() != dim {
                    e.push(format!("half_widths: need {dim} entries, got {}", half_widths.len()));
                }
                if half_widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    e.push("half_widths: entries must be in (0, inf)".into());
                }
            }
            BaseSet::Rect { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    e.push(format!("lo/hi: need {dim} entries each"));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
                    e.push("lo/hi: need finite lo < hi on every axis".into());
                }
            }
            BaseSet::Cell | BaseSet::HalfCell => {}
        }
        e
    }
}

/// Undilated profile `u₁` of a general breather, radial in physical space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `peak·max(0, 1 − |z|/radius)`
    Tent { peak: f64, radius: f64 },
    /// Piecewise-linear in |z| through `values[i]` at `|z| = i·step`, zero past the table.
    Radial { step: f64, values: Vec<f64> },
}

impl Profile {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Profile::Tent { peak, radius } => peak * (1.0 - r / radius).max(0.0),
            Profile::Radial { step, values } => {
                let t = r / step;
                let i = t.floor() as usize;
                if i + 1 >= values.len() {
                    return if i + 1 == values.len() && t == i as f64 { values[i] } else { 0.0 };
                }
                let f = t - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            Profile::Tent { radius, .. } => *radius,
            Profile::Radial { step, values } => step * values.len().saturating_sub(1) as f64,
        }
    }

    pub fn is_radially_nonincreasing(&self) -> bool {
        match self {
            Profile::Tent { .. } => true,
            Profile::Radial { values, .. } => values.windows(2).all(|w| w[1] <= w[0]),
        }
    }

    fn validate(&self) -> Vec<String> {
        let mut e = Vec::new();
        match self {
            Profile::Tent { peak, radius } => {
                if !(peak.is_finite() && *peak >= 0.0) {
                    e.push(format!("peak: must be in [0, inf), got {peak}"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    e.push(format!("radius: must be in (0, inf), got {radius}"));
                }
            }
            Profile::Radial { step, values } => {
                if !(step.is_finite() && *step > 0.0) {
                    e.push(format!("step: must be in (0, inf), got {step}"));
                }
                if values.len() < 2 {
                    e.push("values: need at least 2 entries".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    e.push("values: entries must be finite and nonnegative".into());
                }
            }
        }
        e
    }
}

/// One row of a tabulated single-site family: for λ ≥ `from`, u = value·1_region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomLevel {
    pub from: f64,
    pub value: f64,
    pub region: BaseSet,
}

/// The bump `u(λ, ·)` placed at every lattice site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SingleSitePotential {
    /// u(λ, z) = coupling · 1_{λA}(z)
    StandardBreather { coupling: f64, base: BaseSet },
    /// u(λ, z) = u₁(z/λ), u(0, ·) = 0
    GeneralBreather { profile: Profile },
    /// Rows sorted by `from`; the last row with `from ≤ λ` applies. Regions are not dilated.
    Custom { levels: Vec<CustomLevel> },
    /// level · 1_{z ∈ D, inner(λ, z) ≥ level}
    Cutoff { inner: Box<SingleSitePotential>, level: f64 },
}

impl SingleSitePotential {
    pub fn standard(coupling: f64, base: BaseSet) -> Self {
        SingleSitePotential::StandardBreather { coupling, base }
    }

    /// u(λ, z) given z in reference and physical coordinates.
    pub fn value(&self, lambda: f64, z_ref: &[f64], z_phys: &[f64]) -> f64 {
        match self {
            SingleSitePotential::StandardBreather { coupling, base } => {
                if base.contains(lambda, z_ref, z_phys) {
                    *coupling
                } else {
                    0.0
                }
            }
            SingleSitePotential::GeneralBreather { profile } => {
                if lambda <= 0.0 {
                    return 0.0;
                }
                let r = z_phys.iter().map(|v| v * v).sum::<f64>().sqrt();
                profile.value(r / lambda)
            }
            SingleSitePotential::Custom { levels } => match levels.iter().rev().find(|l| l.from <= lambda) {
                Some(l) if l.region.contains(1.0, z_ref, z_phys) => l.value,
                _ => 0.0,
            },
            SingleSitePotential::Cutoff { inner, level } => {
                let in_cell = z_ref.iter().all(|y| y.abs() < 0.5);
                if in_cell && inner.value(lambda, z_ref, z_phys) >= *level {
                    *level
                } else {
                    0.0
                }
            }
        }
    }

    /// Per-axis reference-coordinate half-width of a box containing supp u(λ, ·).
    pub fn reach(&self, lambda: f64, g: &LatticeGeometry) -> Vec<f64> {
        match self {
            SingleSitePotential::StandardBreather { base, .. } => base.reach(lambda.max(0.0), g),
            SingleSitePotential::GeneralBreather { profile } => g.reference_reach_of_ball(lambda.max(0.0) * profile.radius()),
            SingleSitePotential::Custom { levels } => {
                let mut r = vec![0.0; g.dim()];
                for l in levels {
                    for (a, v) in l.region.reach(1.0, g).into_iter().enumerate() {
                        r[a] = f64::max(r[a], v);
                    }
                }
                r
            }
            SingleSitePotential::Cutoff { inner, .. } => inner.reach(lambda, g).into_iter().map(|v| v.min(0.5)).collect(),
        }
    }

    /// Largest reach over λ ∈ [0, 1].
    pub fn max_reach(&self, g: &LatticeGeometry) -> Vec<f64> {
        self.reach(1.0, g)
    }

    /// The nonzero value of a two-valued family {0, μ}, if the family is one.
    pub fn two_valued_level(&self) -> Option<f64> {
        match self {
            SingleSitePotential::StandardBreather { coupling, .. } => Some(*coupling),
            SingleSitePotential::Cutoff { level, .. } => Some(*level),
            SingleSitePotential::Custom { levels } => {
                let first = levels.first()?.value;
                levels.iter().all(|l| l.value == first).then_some(first)
            }
            SingleSitePotential::GeneralBreather { .. } => None,
        }
    }

    /// Increasing λ never decreases u pointwise.
    pub fn is_monotone_in_lambda(&self) -> bool {
        match self {
            SingleSitePotential::StandardBreather { .. } => true,
            SingleSitePotential::GeneralBreather { profile } => profile.is_radially_nonincreasing(),
            SingleSitePotential::Cutoff { inner, .. } => inner.is_monotone_in_lambda(),
            SingleSitePotential::Custom { .. } => false,
        }
    }

    /// Schema violations, each prefixed with the offending field.
    pub fn validate(&self, dim: usize) -> Vec<String> {
        let mut e = Vec::new();
        match self {
            SingleSitePotential::StandardBreather { coupling, base } => {
                if !(coupling.is_finite() && *coupling > 0.0) {
                    e.push(format!("coupling: must be in (0, inf), got {coupling}"));
                }
                e.extend(base.validate(dim).into_iter().map(|m| format!("base.{m}")));
            }
            SingleSitePotential::GeneralBreather { profile } => e.extend(profile.validate()),
            SingleSitePotential::Custom { levels } => {
                if levels.is_empty() {
                    e.push("levels: need at least one level".into());
                }
                if levels.windows(2).any(|w| w[1].from <= w[0].from) {
                    e.push("levels: `from` must be strictly increasing".into());
                }
                for (i, l) in levels.iter().enumerate() {
                    if !(l.value.is_finite() && l.value >= 0.0) {
                        e.push(format!("levels[{i}].value: must be in [0, inf), got {}", l.value));
                    }
                    if !(0.0..=1.0).contains(&l.from) {
                        e.push(format!("levels[{i}].from: must be in [0, 1], got {}", l.from));
                    }
                    e.extend(l.region.validate(dim).into_iter().map(|m| format!("levels[{i}].region.{m}")));
                }
            }
            SingleSitePotential::Cutoff { inner, level } => {
                if !(level.is_finite() && *level > 0.0) {
                    e.push(format!("level: must be in (0, inf), got {level}"));
                }
                e.extend(inner.validate(dim).into_iter().map(|m| format!("inner.{m}")));
            }
        }
        e
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        let e = self.validate(dim);
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(e.join("; ")))
        }
    }
}

/// The two-valued reduction `A_μ u = μ·1_{q ∈ D : u(q) ≥ μ}`.
pub fn cutoff_simplify(u: &SingleSitePotential, mu: f64) -> Result<SingleSitePotential> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("cutoff level must be positive, got {mu}")));
    }
    Ok(SingleSitePotential::Cutoff {
        inner: Box::new(u.clone()),
        level: mu,
    })
}
