use std::f64::consts::PI;

use breather_lab::eigensolve::{dense_eigen, dense_eigenvalues, lowest_eigenpairs, SolverConfig};
use breather_lab::operators::*;
use breather_lab::potential::{
    evaluate_on_grid, sample_realization, BaseSet, CosineTerm, CouplingLaw, LatticeGeometry, PeriodicBackground,
    PotentialModel, SingleSitePotential,
};
use breather_lab::sparse::CsrMatrix;
use nalgebra::{DMatrix, SymmetricEigen};

fn cubic(d: usize) -> LatticeGeometry {
    LatticeGeometry::cubic(d).unwrap()
}

fn assemble(geom: &LatticeGeometry, bg: &PeriodicBackground, w: Option<&[f64]>, grid: &BoxGrid, kind: BcKind) -> DiscreteHamiltonian {
    let ground = periodic_ground_state(geom, bg, grid.n_h()).unwrap();
    let bc = boundary_condition(kind, Some(&ground), grid).unwrap();
    let zero = vec![0.0; grid.dof()];
    assemble_hamiltonian(geom, &bg.on_grid(grid).unwrap(), w.unwrap_or(&zero), grid, &bc).unwrap()
}

fn shifted_cosine(amplitude: f64, phase: f64) -> PeriodicBackground {
    PeriodicBackground::CosineSum { terms: vec![CosineTerm { amplitude, freq: vec![1], phase }] }
}

#[test]
fn single_cell_dirichlet_stencil() {
    let grid = BoxGrid::centered(1, 0, 4).unwrap();
    let h = assemble(&cubic(1), &PeriodicBackground::Zero, None, &grid, BcKind::Dirichlet);
    let m = h.matrix.to_dense();
    let c = 16.0;
    for i in 0..4 {
        // boundary nodes carry the antisymmetric ghost: 3/h²
        let diag = if i == 0 || i == 3 { 3.0 * c } else { 2.0 * c };
        assert_eq!(m[(i, i)], diag);
        if i + 1 < 4 {
            assert_eq!(m[(i, i + 1)], -c);
            assert_eq!(m[(i + 1, i)], -c);
        }
    }
    assert_eq!(m[(0, 3)], 0.0);
}

#[test]
fn free_dirichlet_spectrum_closed_form() {
    let grid = BoxGrid::centered(1, 2, 6).unwrap();
    let n = grid.dof();
    let hh = grid.h();
    let h = assemble(&cubic(1), &PeriodicBackground::Zero, None, &grid, BcKind::Dirichlet);
    let ev = dense_eigenvalues(&h.matrix.to_dense());
    for (j, v) in ev.iter().enumerate() {
        let exact = 2.0 / (hh * hh) * (1.0 - ((j + 1) as f64 * PI / n as f64).cos());
        assert!((v - exact).abs() < 1e-9 * exact.max(1.0), "j = {j}: {v} vs {exact}");
    }
}

#[test]
fn free_neumann_has_constant_kernel() {
    for d in [1usize, 2] {
        let grid = BoxGrid::centered(d, 1, 4).unwrap();
        let h = assemble(&cubic(d), &PeriodicBackground::Zero, None, &grid, BcKind::Neumann);
        let ones = vec![1.0; grid.dof()];
        assert!(h.matrix.apply(&ones).iter().all(|v| v.abs() < 1e-9));
        let e = lowest_eigenpairs(&h.matrix, &SolverConfig::lowest(1)).unwrap();
        assert!(e.eigenvalues[0].abs() < 1e-9);
    }
}

#[test]
fn flat_and_constant_backgrounds() {
    let g = periodic_ground_state(&cubic(2), &PeriodicBackground::Zero, 6).unwrap();
    assert!(g.e0.abs() < 1e-10);
    assert!((g.psi_max - g.psi_min).abs() < 1e-10 && g.psi_min > 0.0);
    let c = periodic_ground_state(&cubic(1), &PeriodicBackground::Constant { value: 2.5 }, 8).unwrap();
    assert!((c.e0 - 2.5).abs() < 1e-10);
    assert!((c.psi_max - c.psi_min).abs() < 1e-10);
}

/// Circulant −Δ_h + V on n nodes of the unit circle, built by hand.
fn circulant(n: usize, v: &[f64]) -> DMatrix<f64> {
    let c = (n * n) as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * c + v[i]
        } else if (i + 1) % n == j || (j + 1) % n == i {
            -c
        } else {
            0.0
        }
    })
}

fn hill_e0(a: f64, modes: i64) -> f64 {
    let n = (2 * modes + 1) as usize;
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (2.0 * PI * (i as f64 - modes as f64)).powi(2)
        } else if i.abs_diff(j) == 1 {
            a / 2.0
        } else {
            0.0
        }
    });
    SymmetricEigen::new(m).eigenvalues.min()
}

#[test]
fn cosine_ground_energy_matches_oracles() {
    let bg = PeriodicBackground::cosine(1.0);
    let n = 64;
    let g = periodic_ground_state(&cubic(1), &bg, n).unwrap();
    let cell = BoxGrid::unit_cell(1, n).unwrap();
    let dense = SymmetricEigen::new(circulant(n, &bg.on_grid(&cell).unwrap())).eigenvalues.min();
    assert!((g.e0 - dense).abs() < 1e-10, "{} vs {dense}", g.e0);

    let exact = hill_e0(1.0, 30);
    let errs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| (periodic_ground_state(&cubic(1), &bg, n).unwrap().e0 - exact).abs())
        .collect();
    for w in errs.windows(2) {
        assert!((3.5..4.5).contains(&(w[0] / w[1])), "{errs:?}");
    }
}

#[test]
fn mezincescu_coefficients_follow_the_ground_state() {
    let grid = BoxGrid::centered(1, 2, 8).unwrap();
    let flat = periodic_ground_state(&cubic(1), &PeriodicBackground::Zero, 8).unwrap();
    assert!(mezincescu_coefficients(&flat, &grid).unwrap().max_abs() < 1e-9);
    let n = assemble(&cubic(1), &PeriodicBackground::Zero, None, &grid, BcKind::Neumann);
    let m = assemble(&cubic(1), &PeriodicBackground::Zero, None, &grid, BcKind::Mezincescu);
    let diff = &n.matrix.to_dense() - &m.matrix.to_dense();
    assert!(diff.amax() < 1e-6);

    let sym = periodic_ground_state(&cubic(1), &PeriodicBackground::cosine(2.0), 8).unwrap();
    let c = mezincescu_coefficients(&sym, &grid).unwrap();
    assert!((c.rho(0, false, 0) - c.rho(0, true, 0)).abs() < 1e-9);

    let skew = periodic_ground_state(&cubic(1), &shifted_cosine(2.0, 0.7), 8).unwrap();
    let c = mezincescu_coefficients(&skew, &grid).unwrap();
    assert!(c.rho(0, false, 0).abs() > 1e-3);
    assert!((c.rho(0, false, 0) + c.rho(0, true, 0)).abs() < 1e-9);
}

#[test]
fn mezincescu_box_keeps_the_periodic_ground_state() {
    for bg in [PeriodicBackground::cosine(1.0), shifted_cosine(3.0, 0.4)] {
        let ground = periodic_ground_state(&cubic(1), &bg, 8).unwrap();
        for level in 1..=4 {
            let grid = BoxGrid::centered(1, level, 8).unwrap();
            let h = assemble(&cubic(1), &bg, None, &grid, BcKind::Mezincescu);
            let eig = dense_eigen(&h.matrix.to_dense());
            assert!((eig.eigenvalues[0] - ground.e0).abs() < 1e-10);
            let v = eig.eigenvectors.unwrap().column(0).into_owned();
            let psi = ground.periodized(&grid).unwrap();
            let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
            let overlap = v.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>().abs() / norm;
            assert!(overlap > 1.0 - 1e-10, "level {level}: {overlap}");
        }
    }
}

#[test]
fn shift_moves_the_spectrum() {
    let grid = BoxGrid::centered(1, 3, 6).unwrap();
    let h = assemble(&cubic(1), &PeriodicBackground::cosine(1.0), None, &grid, BcKind::Mezincescu);
    assert_eq!(shifted_operator(&h, 0.0), h);
    let gamma = 0.37;
    let s = shifted_operator(&h, gamma);
    assert_eq!(s.shift, gamma);
    let a = dense_eigenvalues(&h.matrix.to_dense());
    let b = dense_eigenvalues(&s.matrix.to_dense());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - gamma - y).abs() < 1e-9);
    }
}

#[test]
fn assembly_is_exactly_symmetric() {
    let geoms = [(cubic(2), BcKind::Neumann), (cubic(2), BcKind::Mezincescu), (cubic(2), BcKind::Dirichlet)];
    let oblique = LatticeGeometry::new(vec![vec![1.0, 0.3], vec![0.0, 1.0]]).unwrap();
    let bg = PeriodicBackground::CosineSum {
        terms: vec![CosineTerm { amplitude: 0.8, freq: vec![1, 1], phase: 0.3 }],
    };
    for (geom, kind) in geoms.into_iter().chain([(oblique.clone(), BcKind::Dirichlet), (oblique, BcKind::Periodic)]) {
        let model = PotentialModel::iid(geom.clone(), SingleSitePotential::standard(1.0, BaseSet::HalfCell), CouplingLaw::uniform())
            .with_background(bg.clone());
        let grid = BoxGrid::centered(2, 1, 4).unwrap();
        let r = sample_realization(&model, &grid.sites(), 2, 0).unwrap();
        let w = evaluate_on_grid(&model, &r, &grid);
        let h = assemble(&geom, &bg, Some(&w), &grid, kind);
        assert_eq!(h.matrix.max_asymmetry(), 0.0, "{kind}");
    }
}

#[test]
fn dirichlet_and_neumann_split_ordering() {
    let geom = cubic(1);
    let grid = BoxGrid::centered(1, 2, 4).unwrap();
    let (a, b) = grid.split(0, 2).unwrap();
    let energies: Vec<f64> = (1..40).map(|i| i as f64 * 5.0).collect();
    let count = |m: &CsrMatrix, e: f64| dense_eigenvalues(&m.to_dense()).iter().filter(|&&v| v <= e).count();
    for (kind, superadditive) in [(BcKind::Dirichlet, true), (BcKind::Neumann, false)] {
        let full = assemble(&geom, &PeriodicBackground::Zero, None, &grid, kind);
        let ha = assemble(&geom, &PeriodicBackground::Zero, None, &a, kind);
        let hb = assemble(&geom, &PeriodicBackground::Zero, None, &b, kind);
        for &e in &energies {
            let (nf, ns) = (count(&full.matrix, e), count(&ha.matrix, e) + count(&hb.matrix, e));
            assert!(if superadditive { nf >= ns } else { nf <= ns }, "{kind} at {e}: {nf} vs {ns}");
        }
    }
}

#[test]
fn gap_shift_relation() {
    use breather_lab::bounds::gap_constant;
    let bg = PeriodicBackground::cosine(1.0);
    let est = gap_constant(&cubic(1), &bg, 8, &[2, 3]).unwrap();
    for row in &est.rows {
        let gamma = est.cgap / (2.0 * (row.level * row.level) as f64);
        let grid = BoxGrid::centered(1, row.level, 8).unwrap();
        let h = shifted_operator(&assemble(&cubic(1), &bg, None, &grid, BcKind::Mezincescu), gamma);
        let e1 = dense_eigenvalues(&h.matrix.to_dense())[0];
        assert!((e1 - (est.e0 - gamma)).abs() < 1e-9);
    }
}
