//! Random breather potentials: lattice geometry, single-site families,
//! coupling laws, realizations and the non-degeneracy diagnostics.

mod background;
mod geometry;
mod law;
mod single_site;

pub use background::{CosineTerm, PeriodicBackground};
pub use geometry::{GeometrySpec, LatticeGeometry};
pub use law::CouplingLaw;
pub use single_site::{cutoff_simplify, BaseSet, CustomLevel, Profile, SingleSitePotential};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::BoxGrid;
use crate::seed;
use crate::spectral_stats::{wilson_interval, Interval};

/// Full specification of the random operator family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub geometry: LatticeGeometry,
    pub single_site: SingleSitePotential,
    /// Laws cycled over the sites of a box in enumeration order; one entry means i.i.d.
    pub laws: Vec<CouplingLaw>,
    #[serde(default)]
    pub background: PeriodicBackground,
}

impl PotentialModel {
    pub fn iid(geometry: LatticeGeometry, single_site: SingleSitePotential, law: CouplingLaw) -> Self {
        PotentialModel {
            geometry,
            single_site,
            laws: vec![law],
            background: PeriodicBackground::Zero,
        }
    }

    pub fn with_background(mut self, background: PeriodicBackground) -> Self {
        self.background = background;
        self
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn validate(&self) -> Vec<String> {
        let d = self.dim();
        let mut e: Vec<String> = self.single_site.validate(d).into_iter().map(|m| format!("single_site.{m}")).collect();
        if self.laws.is_empty() {
            e.push("laws: need at least one law".into());
        }
        for (i, l) in self.laws.iter().enumerate() {
            e.extend(l.validate().into_iter().map(|m| format!("laws[{i}].{m}")));
        }
        e.extend(self.background.validate(d).into_iter().map(|m| format!("background.{m}")));
        e
    }

    pub fn check(&self) -> Result<()> {
        let e = self.validate();
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(e.join("; ")))
        }
    }

    /// Mean of λ under the law attached to the `j`-th site of a box.
    pub fn law_for(&self, j: usize) -> &CouplingLaw {
        &self.laws[j % self.laws.len()]
    }
}

/// A box of lattice sites `lo ..= hi` (per axis).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl SiteBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::Domain("site box must be nonempty".into()));
        }
        Ok(SiteBox { lo, hi })
    }

    /// I_L = {−L..L}^d
    pub fn centered(dim: usize, level: usize) -> Self {
        let l = level as i64;
        SiteBox {
            lo: vec![-l; dim],
            hi: vec![l; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn len(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1) as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| v >= l && v <= h)
    }

    /// Sites in enumeration order (axis 0 fastest).
    pub fn sites(&self) -> Vec<Vec<i64>> {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut rem = j;
            let mut k = Vec::with_capacity(self.dim());
            for a in 0..self.dim() {
                let w = (self.hi[a] - self.lo[a] + 1) as usize;
                k.push(self.lo[a] + (rem % w) as i64);
                rem /= w;
            }
            out.push(k);
        }
        out
    }

    /// Enumeration index of site `k`, if inside.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let mut f = 0usize;
        for a in (0..self.dim()).rev() {
            let w = (self.hi[a] - self.lo[a] + 1) as usize;
            f = f * w + (k[a] - self.lo[a]) as usize;
        }
        Some(f)
    }
}

/// One sampled coupling vector (λ_k) on a site box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub sites: SiteBox,
    pub lambdas: Vec<f64>,
    pub master_seed: u64,
    pub sample_index: u64,
}

impl Realization {
    /// A realization with prescribed couplings (no seed lineage).
    pub fn fixed(sites: SiteBox, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() != sites.len() {
            return Err(Error::Shape {
                what: "couplings per site",
                expected: sites.len(),
                got: lambdas.len(),
            });
        }
        Ok(Realization {
            sites,
            lambdas,
            master_seed: 0,
            sample_index: 0,
        })
    }

    pub fn lambda_at(&self, k: &[i64]) -> Option<f64> {
        self.sites.index_of(k).map(|j| self.lambdas[j])
    }
}

/// Draw λ_k for every k in `sites` from the stream keyed by (seed, sample, k).
pub fn sample_realization(model: &PotentialModel, sites: &SiteBox, master_seed: u64, sample_index: u64) -> Result<Realization> {
    if sites.dim() != model.dim() {
        return Err(Error::Shape {
            what: "site box dimension",
            expected: model.dim(),
            got: sites.dim(),
        });
    }
    if model.laws.is_empty() {
        return Err(Error::Config("at least one coupling law is required".into()));
    }
    for l in &model.laws {
        l.check_distribution()?;
    }
    let lambdas = sites
        .sites()
        .iter()
        .enumerate()
        .map(|(j, k)| {
            let u: f64 = seed::site_stream(master_seed, sample_index, k).gen();
            model.law_for(j).quantile(u)
        })
        .collect();
    Ok(Realization {
        sites: sites.clone(),
        lambdas,
        master_seed,
        sample_index,
    })
}

/// W_ω at a physical point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValue {
    pub value: f64,
    /// Some site outside the realization could contribute at this point.
    pub partial: bool,
}

pub fn evaluate_potential(model: &PotentialModel, realization: &Realization, x: &[f64]) -> PointValue {
    let g = &model.geometry;
    let y = g.to_reference(x);
    let reach = model.single_site.max_reach(g);
    let d = g.dim();
    let lo: Vec<i64> = (0..d).map(|a| (y[a] - reach[a]).ceil() as i64).collect();
    let hi: Vec<i64> = (0..d).map(|a| (y[a] + reach[a]).floor() as i64).collect();
    let mut value = 0.0;
    let mut partial = false;
    if lo.iter().zip(&hi).all(|(l, h)| l <= h) {
        let candidates = SiteBox::new(lo, hi).expect("nonempty");
        for k in candidates.sites() {
            match realization.lambda_at(&k) {
                Some(lambda) => {
                    let z: Vec<f64> = y.iter().zip(&k).map(|(v, kk)| v - *kk as f64).collect();
                    let zp = g.to_physical(&z);
                    value += model.single_site.value(lambda, &z, &zp);
                }
                None => partial = true,
            }
        }
    }
    PointValue { value, partial }
}

/// W_ω at every node of `grid`.
pub fn evaluate_on_grid(model: &PotentialModel, realization: &Realization, grid: &BoxGrid) -> Vec<f64> {
    let g = &model.geometry;
    let d = grid.dim();
    let h = grid.h();
    let mut w = vec![0.0; grid.dof()];
    let mut z = vec![0.0; d];
    for (k, &lambda) in realization.sites.sites().iter().zip(&realization.lambdas) {
        let reach = model.single_site.reach(lambda, g);
        // node index range per axis whose coordinate lies within the reach of k
        let mut ranges = Vec::with_capacity(d);
        let mut empty = false;
        for a in 0..d {
            let c0 = grid.lo()[a] as f64 - 0.5;
            let first = ((k[a] as f64 - reach[a] - c0) / h - 0.5 - 1e-9).ceil().max(0.0) as usize;
            let last_f = ((k[a] as f64 + reach[a] - c0) / h - 0.5 + 1e-9).floor();
            if last_f < 0.0 {
                empty = true;
                break;
            }
            let last = (last_f as usize).min(grid.nodes(a) - 1);
            if first > last {
                empty = true;
                break;
            }
            ranges.push((first, last));
        }
        if empty {
            continue;
        }
        let counts: Vec<usize> = ranges.iter().map(|(f, l)| l - f + 1).collect();
        let total: usize = counts.iter().product();
        let mut idx = vec![0usize; d];
        for j in 0..total {
            let mut rem = j;
            for a in 0..d {
                idx[a] = ranges[a].0 + rem % counts[a];
                rem /= counts[a];
                z[a] = grid.coord(a, idx[a]) - k[a] as f64;
            }
            let zp = g.to_physical(&z);
            let v = model.single_site.value(lambda, &z, &zp);
            if v != 0.0 {
                w[grid.flat(&idx)] += v;
            }
        }
    }
    w
}

/// u(λ, ·) on the unit-cell grid.
pub fn single_site_on_cell(model: &PotentialModel, lambda: f64, n_h: usize) -> Result<Vec<f64>> {
    let cell = BoxGrid::unit_cell(model.dim(), n_h)?;
    let g = &model.geometry;
    Ok((0..cell.dof())
        .map(|n| {
            let z = cell.node_coords(n);
            model.single_site.value(lambda, &z, &g.to_physical(&z))
        })
        .collect())
}

/// Monte Carlo estimate of one law's contribution to the non-degeneracy margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawMargin {
    pub law_index: usize,
    pub mean: f64,
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonDegeneracyMargin {
    /// inf over laws of E ∫_D min{u_λ, 1}
    pub estimate: f64,
    pub half_width: f64,
    pub per_law: Vec<LawMargin>,
}

impl NonDegeneracyMargin {
    pub fn lower_bound(&self) -> f64 {
        self.estimate - self.half_width
    }
}

/// Estimate inf_k E ∫_D min{u(λ_k, x), 1} dx by sampling λ from every law.
pub fn non_degeneracy_margin(model: &PotentialModel, n_samples: usize, seed: u64, n_h: usize) -> Result<NonDegeneracyMargin> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be >= 1".into()));
    }
    let weight = BoxGrid::unit_cell(model.dim(), n_h)?.node_volume() * model.geometry.det();
    let mut per_law = Vec::with_capacity(model.laws.len());
    for (li, law) in model.laws.iter().enumerate() {
        law.check()?;
        let mut vals = Vec::with_capacity(n_samples);
        for s in 0..n_samples {
            let lambda = law.quantile(seed::uniform(&[seed, li as u64, s as u64, 0xD0]));
            let u = single_site_on_cell(model, lambda, n_h)?;
            vals.push(u.iter().map(|v| v.min(1.0)).sum::<f64>() * weight);
        }
        let n = n_samples as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = if n_samples > 1 {
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        per_law.push(LawMargin {
            law_index: li,
            mean,
            half_width: 1.96 * (var / n).sqrt(),
        });
    }
    let worst = per_law
        .iter()
        .min_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap())
        .cloned()
        .expect("at least one law");
    Ok(NonDegeneracyMargin {
        estimate: worst.mean,
        half_width: worst.half_width,
        per_law,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuCheck {
    pub mu: f64,
    pub pass: bool,
    /// inf over laws of the estimated P{|{u ≥ μ} ∩ D| ≥ μ}
    pub probability: f64,
    pub interval: Interval,
}

/// Test μ-non-degeneracy: the Wilson lower bound of the worst law must reach μ.
pub fn mu_nondegeneracy_check(model: &PotentialModel, mu: f64, n_samples: usize, seed: u64, n_h: usize) -> Result<MuCheck> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("mu must be in (0, 1], got {mu}")));
    }
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be >= 1".into()));
    }
    let weight = BoxGrid::unit_cell(model.dim(), n_h)?.node_volume() * model.geometry.det();
    let mut worst: Option<(f64, Interval)> = None;
    for (li, law) in model.laws.iter().enumerate() {
        law.check()?;
        let mut hits = 0usize;
        for s in 0..n_samples {
            let lambda = law.quantile(seed::uniform(&[seed, li as u64, s as u64, 0xD1]));
            let u = single_site_on_cell(model, lambda, n_h)?;
            let measure = u.iter().filter(|&&v| v >= mu).count() as f64 * weight;
            if measure >= mu - 1e-12 {
                hits += 1;
            }
        }
        let ci = wilson_interval(hits, n_samples);
        let p = hits as f64 / n_samples as f64;
        if worst.as_ref().map_or(true, |(wp, _)| p < *wp) {
            worst = Some((p, ci));
        }
    }
    let (probability, interval) = worst.expect("at least one law");
    Ok(MuCheck {
        mu,
        pass: interval.lo >= mu,
        probability,
        interval,
    })
}

/// Largest μ in {1, ½, ¼, …, 2⁻¹⁰} that passes `mu_nondegeneracy_check`.
pub fn find_nondegeneracy_level(model: &PotentialModel, n_samples: usize, seed: u64, n_h: usize) -> Result<Option<f64>> {
    for j in 0..=10 {
        let mu = 0.5f64.powi(j);
        if mu_nondegeneracy_check(model, mu, n_samples, seed, n_h)?.pass {
            return Ok(Some(mu));
        }
    }
    Ok(None)
}
