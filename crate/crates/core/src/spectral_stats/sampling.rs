use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    assemble_hamiltonian, boundary_condition, periodic_ground_state, BcKind, BoundaryCondition, BoxGrid,
    DiscreteHamiltonian, PeriodicGroundState,
};
use crate::potential::{evaluate_on_grid, sample_realization, PotentialModel, Realization, SiteBox};
use crate::seed;

/// Master seed, sample count and worker count of a Monte Carlo campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub seed: u64,
    pub samples: usize,
    pub jobs: usize,
}

impl Campaign {
    pub fn new(seed: u64, samples: usize) -> Self {
        Campaign { seed, samples, jobs: 1 }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    /// The same campaign under a derived seed.
    pub fn child(&self, key: u64) -> Self {
        Campaign {
            seed: seed::derive(&[self.seed, key]),
            ..*self
        }
    }

    /// Evaluate `f(i)` for every sample index, in index order.
    pub fn map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        par_map(self.samples, self.jobs, f)
    }
}

/// `f(0..n)` on `jobs` threads; results keep their index so the output does
/// not depend on scheduling.
pub fn par_map<T, F>(n: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if jobs <= 1 {
        return (0..n as u64).map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| (0..n as u64).into_par_iter().map(&f).collect())
}

/// Everything about a centred box Λ_L that does not depend on ω.
#[derive(Clone, Debug)]
pub struct BoxSetup {
    pub model: PotentialModel,
    pub ground: PeriodicGroundState,
    pub grid: BoxGrid,
    pub sites: SiteBox,
    pub vper: Vec<f64>,
}

impl BoxSetup {
    pub fn new(model: &PotentialModel, level: usize, n_h: usize) -> Result<Self> {
        let ground = periodic_ground_state(&model.geometry, &model.background, n_h)?;
        Self::with_ground(model, ground, level)
    }

    pub fn with_ground(model: &PotentialModel, ground: PeriodicGroundState, level: usize) -> Result<Self> {
        let grid = BoxGrid::centered(model.dim(), level, ground.n_h)?;
        let vper = model.background.on_grid(&grid)?;
        Ok(BoxSetup {
            model: model.clone(),
            sites: grid.sites(),
            ground,
            grid,
            vper,
        })
    }

    pub fn level(&self) -> usize {
        self.grid.level().expect("centred box")
    }

    pub fn e0(&self) -> f64 {
        self.ground.e0
    }

    /// |Λ_L| = (2L+1)^d det M
    pub fn volume(&self) -> f64 {
        self.grid.num_cells() as f64 * self.model.geometry.det()
    }

    pub fn bc(&self, kind: BcKind) -> Result<BoundaryCondition> {
        boundary_condition(kind, Some(&self.ground), &self.grid)
    }

    pub fn realization(&self, seed: u64, sample: u64) -> Result<Realization> {
        sample_realization(&self.model, &self.sites, seed, sample)
    }

    pub fn w(&self, realization: &Realization) -> Vec<f64> {
        evaluate_on_grid(&self.model, realization, &self.grid)
    }

    pub fn hamiltonian(&self, w: &[f64], bc: &BoundaryCondition) -> Result<DiscreteHamiltonian> {
        assemble_hamiltonian(&self.model.geometry, &self.vper, w, &self.grid, bc)
    }

    /// H_ω for sample `sample` of campaign seed `seed`.
    pub fn sample(&self, seed: u64, sample: u64, bc: &BoundaryCondition) -> Result<DiscreteHamiltonian> {
        let w = self.w(&self.realization(seed, sample)?);
        self.hamiltonian(&w, bc)
    }
}
