use breather_lab::bounds::*;
use breather_lab::operators::{
    assemble_hamiltonian, boundary_condition, periodic_ground_state, BcKind, BoundaryCondition, BoxGrid,
};
use breather_lab::potential::{
    evaluate_on_grid, sample_realization, BaseSet, CouplingLaw, LatticeGeometry, PeriodicBackground, PotentialModel,
    Realization, SingleSitePotential, SiteBox,
};
use breather_lab::eigensolve::{dense_eigenvalues, lowest_eigenpairs, SolverConfig};
use breather_lab::Error;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

fn half_cell_model(coupling: f64, law: CouplingLaw) -> PotentialModel {
    PotentialModel::iid(
        LatticeGeometry::cubic(1).unwrap(),
        SingleSitePotential::standard(coupling, BaseSet::HalfCell),
        law,
    )
}

#[test]
fn thirring_suite_small() {
    let rep = certify_thirring_suite(2_000, 11).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.checked, 2_000);
}

#[test]
fn projection_suite_small() {
    let rep = certify_projection_suite(200, 12).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn projection_singular_is_domain_error() {
    let h = DMatrix::identity(3, 3);
    let q = DMatrix::zeros(3, 1);
    assert!(matches!(thirring_projection_bound(&h, &[1.0; 3], &q, 1e-10), Err(Error::Domain(_))));
}

#[test]
fn temple_suite_small() {
    let rep = certify_temple_suite(500, 13).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.checked > 100, "too few instances met the hypothesis: {rep:?}");
}

#[test]
fn temple_indicator_fails_hypothesis_at_large_coupling() {
    let inst = temple_indicator_instance(2, 8, 100.0).unwrap();
    // two-valued W: second moment = coupling × first moment
    assert!((inst.second_moment - 100.0 * inst.first_moment).abs() < 1e-9 * inst.second_moment);
    assert!((inst.first_moment - 50.0).abs() < 1e-9);
    assert!(inst.hypothesis_violated && inst.value.is_none());
    assert!(certify_temple_failure_path().unwrap().pass);
}

#[test]
fn temple_indicator_small_coupling_is_valid_but_loose() {
    let inst = temple_indicator_instance(2, 8, 0.5).unwrap();
    assert!(!inst.hypothesis_violated);
    assert!(inst.value.unwrap() <= inst.e1 + 1e-10);
}

#[test]
fn bernstein_examples() {
    assert!((bernstein_bound(0.5, 100).unwrap() - (-1.5625f64).exp()).abs() < 1e-15);
    assert!(exact_bernoulli_tail(0.5, 100) <= 0.209_611);
    assert!(certify_bernstein_suite().unwrap().pass);
}

#[test]
fn chernoff_bernoulli_half_matches_grid_search() {
    let law = ConcentrationLaw::Bernoulli { p: 0.5 };
    let r = chernoff_rate(&law).unwrap();
    let grid_min = (1..=10_000).map(|i| law.mgf(i as f64 * CHERNOFF_T_MAX / 10_000.0)).fold(f64::INFINITY, f64::min);
    assert!((r.m_s - grid_min).abs() < 1e-6);
    assert!(r.m_s < 1.0);
    // closed form: minimizer ln(3)/2
    assert!((r.s - 3f64.ln() / 2.0).abs() < 1e-6);
}

#[test]
fn chernoff_simulation_respects_bound() {
    let rep = certify_chernoff_suite(20_000, 21).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn gap_constant_free_neumann() {
    let g = LatticeGeometry::cubic(1).unwrap();
    let est = gap_constant(&g, &PeriodicBackground::Zero, 8, &[1, 2, 4]).unwrap();
    for row in &est.rows {
        let side = (2 * row.level + 1) as f64;
        let h = 1.0 / 8.0;
        // discrete Neumann cell-centred: (4/h²) sin²(πh/(2·side))
        let exact = 4.0 / (h * h) * (std::f64::consts::PI * h / (2.0 * side)).sin().powi(2);
        assert!((row.gap - exact).abs() < 1e-8, "{row:?} vs {exact}");
        assert!((row.gap - std::f64::consts::PI.powi(2) / side.powi(2)).abs() < 0.01 * row.gap);
    }
}

#[test]
fn gap_constant_shift_invariant() {
    let g = LatticeGeometry::cubic(1).unwrap();
    let a = gap_constant(&g, &PeriodicBackground::cosine(1.0), 8, &[2, 3]).unwrap();
    let shifted = PeriodicBackground::CosineSum {
        terms: vec![
            breather_lab::potential::CosineTerm { amplitude: 1.0, freq: vec![1], phase: 0.0 },
            breather_lab::potential::CosineTerm { amplitude: 0.7, freq: vec![0], phase: 0.0 },
        ],
    };
    let b = gap_constant(&g, &shifted, 8, &[2, 3]).unwrap();
    assert!((a.cgap - b.cgap).abs() < 1e-8);
    assert!((a.e0 + 0.7 - b.e0).abs() < 1e-9);
}

#[test]
fn critical_length_properties() {
    assert_eq!(critical_length(0.01, 0.0, 2.0, 0.04).unwrap(), 1);
    let a = critical_length(1e-4, 0.0, 2.0, 1.0).unwrap();
    let b = critical_length(5e-5, 0.0, 2.0, 1.0).unwrap();
    assert!((b as f64 / a as f64 - 2f64.sqrt()).abs() < 0.05);
    for &beta in &[0.01, 0.3, 1.0] {
        let e = 1e-3;
        assert!(critical_length_upper(e, 0.0, 2.0).unwrap() >= critical_length(e, 0.0, 2.0, beta).unwrap());
    }
    let c = ProofConstants::new(2.0, 0.1, 0.5).unwrap();
    assert!(matches!(c.critical_length(1.0, 0.0), Err(Error::OutOfRegime(_))));
}

#[test]
fn xk_flat_ground_state() {
    let geom = LatticeGeometry::cubic(1).unwrap();
    let psi = periodic_ground_state(&geom, &PeriodicBackground::Zero, 16).unwrap();
    let model = half_cell_model(1.0, CouplingLaw::uniform());
    assert!((x_for_lambda(&psi, &model, 1.0).unwrap() - 0.5).abs() < 1e-12);
    assert!((x_for_lambda(&psi, &model, 0.5).unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(x_for_lambda(&psi, &model, 0.0).unwrap(), 0.0);
    let real = Realization::fixed(SiteBox::centered(1, 1), vec![0.0, 1.0, 0.5]).unwrap();
    assert!((xk_statistic(&psi, &model, &real, &[0]).unwrap() - 0.5).abs() < 1e-12);
    assert!((s_average(&psi, &model, &real).unwrap() - 0.25).abs() < 1e-12);
}

/// Continuum ground state of −ψ'' + a·cos(2πy)ψ from a truncated Fourier
/// (Hill) matrix; returns E₀ and the cosine coefficients of ψ with ∫₀¹ψ² = 1.
fn hill_ground_state(a: f64, modes: i64) -> (f64, Vec<(i64, f64)>) {
    let n = (2 * modes + 1) as usize;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let k = i as i64 - modes;
        m[(i, i)] = (2.0 * std::f64::consts::PI * k as f64).powi(2);
        if i + 1 < n {
            m[(i, i + 1)] = a / 2.0;
            m[(i + 1, i)] = a / 2.0;
        }
    }
    let eig = SymmetricEigen::new(m);
    let j = eig.eigenvalues.imin();
    let v: DVector<f64> = eig.eigenvectors.column(j).into_owned();
    let sign = if v[modes as usize] < 0.0 { -1.0 } else { 1.0 };
    let coeffs = (0..n).map(|i| (i as i64 - modes, sign * v[i])).collect();
    (eig.eigenvalues[j], coeffs)
}

fn hill_psi(coeffs: &[(i64, f64)], y: f64) -> f64 {
    coeffs.iter().map(|(k, c)| c * (2.0 * std::f64::consts::PI * *k as f64 * y).cos()).sum()
}

#[test]
fn xk_cosine_background_matches_continuum_quadrature() {
    let (_, coeffs) = hill_ground_state(3.0, 20);
    // Simpson on [-1/4, 1/4]
    let m = 2000;
    let hs = 0.5 / m as f64;
    let mut oracle = 0.0;
    for i in 0..=m {
        let y = -0.25 + i as f64 * hs;
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        oracle += w * hill_psi(&coeffs, y).powi(2);
    }
    oracle *= hs / 3.0;
    let geom = LatticeGeometry::cubic(1).unwrap();
    let model = half_cell_model(1.0, CouplingLaw::uniform());
    let mut errs = Vec::new();
    for &n_h in &[16usize, 32, 64] {
        let psi = periodic_ground_state(&geom, &PeriodicBackground::cosine(3.0), n_h).unwrap();
        errs.push((x_for_lambda(&psi, &model, 1.0).unwrap() - oracle).abs());
    }
    assert!(errs[2] < 2e-3, "{errs:?}");
    assert!(errs[0] / errs[2] > 8.0, "not second order: {errs:?}");
}

#[test]
fn e0_matches_hill_oracle_at_second_order() {
    let (e_cont, _) = hill_ground_state(3.0, 20);
    let geom = LatticeGeometry::cubic(1).unwrap();
    let errs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| (periodic_ground_state(&geom, &PeriodicBackground::cosine(3.0), n).unwrap().e0 - e_cont).abs())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{errs:?}");
    }
}

fn xsv_setup(lambdas: Vec<f64>, coupling: f64) -> (XsvBound, f64, f64) {
    let geom = LatticeGeometry::cubic(1).unwrap();
    let n_h = 8;
    let psi = periodic_ground_state(&geom, &PeriodicBackground::Zero, n_h).unwrap();
    let model = half_cell_model(coupling, CouplingLaw::uniform());
    let sites = SiteBox::centered(1, 3);
    let real = Realization::fixed(sites.clone(), lambdas).unwrap();
    let grid = BoxGrid::for_sites(&sites, n_h).unwrap();
    let w = evaluate_on_grid(&model, &real, &grid);
    let zero = vec![0.0; grid.dof()];
    let bc = boundary_condition(BcKind::Mezincescu, Some(&psi), &grid).unwrap();
    let h0 = assemble_hamiltonian(&geom, &zero, &zero, &grid, &bc).unwrap();
    let e1 = lowest_eigenpairs(&h0.matrix, &SolverConfig::lowest(1)).unwrap().eigenvalues[0];
    let c = ProofConstants::new(2.0, coupling, 0.5).unwrap();
    let gamma = c.gamma(3);
    let s = s_average(&psi, &model, &real).unwrap();
    let b = xsv_eigenvalue_bound(e1, &psi, &grid, &w, gamma, coupling, s, c.l0(), CERT_SLACK).unwrap();
    (b, gamma, s)
}

#[test]
fn xsv_zero_realization_is_trivial() {
    let (b, _, s) = xsv_setup(vec![0.0; 7], 1.0);
    assert_eq!(s, 0.0);
    assert_eq!(b.lhs, 0.0);
    assert!(b.holds);
}

#[test]
fn xsv_closed_form_agrees_with_quadrature() {
    let (b, gamma, s) = xsv_setup(vec![1.0, 0.5, 0.0, 1.0, 0.25, 1.0, 0.75], 1.0);
    let closed = b.inner_closed_form.unwrap();
    assert!((closed - b.inner_quadrature).abs() < 1e-12);
    assert!(((1.0 / closed - gamma) - xsv_closed_form(gamma, 1.0, s)).abs() < 1e-12);
    assert!(b.holds);
}

#[test]
fn xsv_holds_on_random_realizations() {
    let geom = LatticeGeometry::cubic(1).unwrap();
    let psi = periodic_ground_state(&geom, &PeriodicBackground::Zero, 8).unwrap();
    let model = half_cell_model(1.0, CouplingLaw::uniform());
    let sites = SiteBox::centered(1, 3);
    let grid = BoxGrid::for_sites(&sites, 8).unwrap();
    let c = ProofConstants::new(2.0, 1.0, 0.5).unwrap();
    let zero = vec![0.0; grid.dof()];
    let bc = boundary_condition(BcKind::Mezincescu, Some(&psi), &grid).unwrap();
    let e1 = dense_eigenvalues(&assemble_hamiltonian(&geom, &zero, &zero, &grid, &bc).unwrap().matrix.to_dense())[0];
    for i in 0..50 {
        let real = sample_realization(&model, &sites, 5, i).unwrap();
        let w = evaluate_on_grid(&model, &real, &grid);
        let s = s_average(&psi, &model, &real).unwrap();
        let b = xsv_eigenvalue_bound(e1, &psi, &grid, &w, c.gamma(3), 1.0, s, c.l0(), CERT_SLACK).unwrap();
        assert!(b.holds, "{b:?}");
    }
}

#[test]
fn xsv_below_l0_is_out_of_regime() {
    let geom = LatticeGeometry::cubic(1).unwrap();
    let psi = periodic_ground_state(&geom, &PeriodicBackground::Zero, 8).unwrap();
    let grid = BoxGrid::centered(1, 1, 8).unwrap();
    let w = vec![0.0; grid.dof()];
    let r = xsv_eigenvalue_bound(0.0, &psi, &grid, &w, 0.5, 0.01, 0.0, 7, CERT_SLACK);
    assert!(matches!(r, Err(Error::OutOfRegime(_))));
}

#[test]
fn neumann_is_used_for_the_indicator_instance() {
    // sanity: the free Neumann box has E₁ = 0 and a flat ground state
    let geom = LatticeGeometry::cubic(1).unwrap();
    let grid = BoxGrid::centered(1, 2, 8).unwrap();
    let zero = vec![0.0; grid.dof()];
    let h = assemble_hamiltonian(&geom, &zero, &zero, &grid, &BoundaryCondition::Neumann).unwrap();
    assert!(dense_eigenvalues(&h.matrix.to_dense())[0].abs() < 1e-10);
}
