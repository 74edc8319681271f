//! Eigenvalue inequalities (Thirring, Temple), the gap constant and the
//! derived length scales, the X_k/S_L statistics, and the Chernoff and
//! Bernstein concentration bounds. Each inequality has a certification suite
//! that checks it against a dense oracle on random instances.

mod concentration;
mod constants;
mod temple;
mod thirring;
mod xs;

pub use concentration::{
    bernstein_bound, binomial_cdf, chernoff_rate, exact_bernoulli_tail, simulate_lower_tail, ChernoffRate,
    ConcentrationLaw, CHERNOFF_T_MAX,
};
pub use constants::{critical_length, critical_length_upper, gap_constant, GapEstimate, GapRow, ProofConstants};
pub use temple::{certify_temple, temple_indicator_instance, temple_lower_bound, IndicatorTemple, TempleCertificate};
pub use thirring::{
    certify_thirring_corollary, thirring_corollary_bound, thirring_projection_bound, ProjectionCertificate,
    ThirringCertificate, ThirringInput,
};
pub use xs::{s_average, x_for_lambda, xk_statistic, xsv_closed_form, xsv_eigenvalue_bound, XsvBound};

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::seed;

/// Absolute slack applied to every certified inequality.
pub const CERT_SLACK: f64 = 1e-10;

/// Outcome of one certification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    /// Instances on which the inequality was actually tested.
    pub checked: usize,
    pub failures: usize,
    /// Largest amount by which an inequality was exceeded (≤ 0 when all hold).
    pub worst_margin: f64,
    pub pass: bool,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.to_string(),
            instances: 0,
            checked: 0,
            failures: 0,
            worst_margin: f64::NEG_INFINITY,
            pass: true,
        }
    }

    fn record(&mut self, checked: bool, margin: f64, ok: bool) {
        self.instances += 1;
        if checked {
            self.checked += 1;
            self.worst_margin = self.worst_margin.max(margin);
            if !ok {
                self.failures += 1;
                self.pass = false;
            }
        }
    }
}

/// Instance counts for [`run_certifications`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationSizes {
    pub thirring: usize,
    pub projection: usize,
    pub temple: usize,
    pub chernoff_runs: usize,
}

impl Default for CertificationSizes {
    fn default() -> Self {
        CertificationSizes {
            thirring: 10_000,
            projection: 1_000,
            temple: 1_000,
            chernoff_runs: 100_000,
        }
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

fn random_positive_diagonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.01..3.0)).collect()
}

/// Random dense instances of the corollary min{E₁ + ⟨ψ,V⁻¹ψ⟩⁻¹, E₂} ≤ E₁(H+V).
pub fn certify_thirring_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("thirring-corollary");
    for i in 0..instances {
        let mut rng = seed::stream(&[seed, 0x7431, i as u64]);
        let n = rng.gen_range(1..=8);
        let h = random_symmetric(&mut rng, n);
        let v = random_positive_diagonal(&mut rng, n);
        let c = certify_thirring_corollary(&ThirringInput::new(h, v)?, CERT_SLACK)?;
        rep.record(true, c.bound - c.e1_perturbed, c.holds);
    }
    Ok(rep)
}

/// Random rank-2 projections in dimension 6.
pub fn certify_projection_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("thirring-projection");
    for i in 0..instances {
        let mut rng = seed::stream(&[seed, 0x7432, i as u64]);
        let h = random_symmetric(&mut rng, 6);
        let v = random_positive_diagonal(&mut rng, 6);
        let raw = DMatrix::from_fn(6, 2, |_, _| rng.gen_range(-1.0..1.0));
        let q = raw.qr().q();
        let c = thirring_projection_bound(&h, &v, &q, CERT_SLACK)?;
        rep.record(true, c.max_eigenvalue_excess.max(-c.min_eig_difference), c.holds);
    }
    Ok(rep)
}

/// Random symmetric H with trial vectors near the ground state and ν drawn
/// in (⟨ψ,Hψ⟩, E₂]; instances where the hypothesis fails are not checked.
pub fn certify_temple_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("temple");
    for i in 0..instances {
        let mut rng = seed::stream(&[seed, 0x7e37, i as u64]);
        let n = rng.gen_range(2..=8);
        let h = random_symmetric(&mut rng, n);
        let eig = crate::eigensolve::dense_eigen(&h);
        let ground = eig.eigenvectors.as_ref().expect("dense eigenvectors").column(0).into_owned();
        let noise = rng.gen_range(0.0..0.8);
        let mut psi: Vec<f64> = ground.iter().map(|g| g + noise * rng.gen_range(-1.0..1.0)).collect();
        let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|x| *x /= norm);
        let e2 = eig.eigenvalues[1];
        let nu = e2 - rng.gen_range(0.0..0.5) * (e2 - eig.eigenvalues[0]);
        let c = certify_temple(&h, &psi, nu, CERT_SLACK)?;
        let margin = c.value.map_or(f64::NEG_INFINITY, |v| v - c.e1);
        rep.record(c.hypothesis_holds, margin, c.holds);
    }
    Ok(rep)
}

/// The two-valued indicator instance must take the hypothesis-failure path.
pub fn certify_temple_failure_path() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("temple-indicator-failure");
    let inst = temple_indicator_instance(2, 8, 100.0)?;
    let ratio_ok = (inst.second_moment - inst.coupling * inst.first_moment).abs() <= 1e-9 * inst.second_moment;
    rep.record(true, inst.first_moment - inst.e2, inst.hypothesis_violated && ratio_ok);
    Ok(rep)
}

/// Exact Bernoulli(β) tails against exp(−β²n/16) on the standard grid.
pub fn certify_bernstein_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("bernstein");
    for &beta in &[0.2, 0.5, 0.9] {
        for &n in &[20usize, 50, 100, 200] {
            let bound = bernstein_bound(beta, n)?;
            let exact = exact_bernoulli_tail(beta, n);
            rep.record(true, exact - bound, exact <= bound + CERT_SLACK);
        }
    }
    Ok(rep)
}

/// M(s*) < 1 − 10⁻⁶ and simulated tails within 3σ of exp(−Cld·n).
pub fn certify_chernoff_suite(runs: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("chernoff");
    let laws = [ConcentrationLaw::Bernoulli { p: 0.5 }, ConcentrationLaw::Uniform];
    for (li, law) in laws.iter().enumerate() {
        let rate = chernoff_rate(law)?;
        rep.record(true, rate.m_s - (1.0 - 1e-6), rate.m_s < 1.0 - 1e-6);
        for &n in &[20usize, 50, 100] {
            let bound = (-rate.cld * n as f64).exp();
            let sigma = (bound * (1.0 - bound) / runs as f64).sqrt();
            let p = simulate_lower_tail(law, n, runs, seed::derive(&[seed, li as u64]));
            rep.record(true, p - bound - 3.0 * sigma, p <= bound + 3.0 * sigma);
        }
    }
    Ok(rep)
}

/// Every suite of this module, in a fixed order.
pub fn run_certifications(sizes: &CertificationSizes, seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        certify_thirring_suite(sizes.thirring, seed)?,
        certify_projection_suite(sizes.projection, seed)?,
        certify_temple_suite(sizes.temple, seed)?,
        certify_temple_failure_path()?,
        certify_bernstein_suite()?,
        certify_chernoff_suite(sizes.chernoff_runs, seed)?,
    ])
}
