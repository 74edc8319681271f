use breather_lab::eigensolve::*;
use breather_lab::operators::{assemble_hamiltonian, BoundaryCondition, BoxGrid};
use breather_lab::potential::LatticeGeometry;
use breather_lab::sparse::CsrMatrix;
use breather_lab::Error;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tridiagonal(n: usize, diag: f64, off: f64) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, diag));
        if i + 1 < n {
            t.push((i, i + 1, off));
            t.push((i + 1, i, off));
        }
    }
    CsrMatrix::from_triplets(n, t)
}

#[test]
fn three_node_laplacian() {
    let r = lowest_eigenpairs(&tridiagonal(3, 2.0, -1.0), &SolverConfig::lowest(3)).unwrap();
    let s = 2f64.sqrt();
    for (v, e) in r.eigenvalues.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
        assert!((v - e).abs() < 1e-12);
    }
    assert!(r.complete);
}

#[test]
fn free_neumann_ground_pair() {
    let grid = BoxGrid::centered(1, 30, 8).unwrap();
    let z = vec![0.0; grid.dof()];
    let h = assemble_hamiltonian(&LatticeGeometry::cubic(1).unwrap(), &z, &z, &grid, &BoundaryCondition::Neumann).unwrap();
    assert!(grid.dof() > 400);
    let r = lowest_eigenpairs(&h.matrix, &SolverConfig::lowest(2).iterative_only()).unwrap();
    assert_eq!(r.method, Method::Iterative);
    assert!(r.eigenvalues[0].abs() < 1e-6);
    let v = r.eigenvectors.unwrap().column(0).into_owned();
    let mean = v.mean();
    assert!(v.iter().all(|x| (x - mean).abs() < 1e-4 * mean.abs()));
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

#[test]
fn iterative_matches_dense_on_random_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let a = random_symmetric(&mut rng, 50);
    let dense = dense_eigenvalues(&a);
    let it = lowest_eigenpairs(&CsrMatrix::from_dense(&a), &SolverConfig::lowest(5).iterative_only()).unwrap();
    for j in 0..5 {
        assert!((it.eigenvalues[j] - dense[j]).abs() < 1e-8, "{j}: {} vs {}", it.eigenvalues[j], dense[j]);
    }
    assert!(it.residuals.iter().all(|r| *r < 1e-6));
}

#[test]
fn iterative_agrees_with_dense_on_sparse_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let n = rng.gen_range(20..=500);
        let bw = rng.gen_range(1..=4);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 * bw as f64 + rng.gen_range(0.0..3.0)));
            for k in 1..=bw {
                if i + k < n {
                    let v = -rng.gen_range(0.1..1.0);
                    t.push((i, i + k, v));
                    t.push((i + k, i, v));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let k = rng.gen_range(1..=3);
        let it = lowest_eigenpairs(&a, &SolverConfig { tol: 1e-11, ..SolverConfig::lowest(k).iterative_only() }).unwrap();
        let dense = dense_eigenvalues(&a.to_dense());
        for j in 0..k {
            let rel = (it.eigenvalues[j] - dense[j]).abs() / dense[j].abs().max(1.0);
            assert!(rel < 1e-8, "case {case} (n = {n}, k = {k}) eigenvalue {j}: rel {rel:.2e}");
        }
    }
}

#[test]
fn dense_examples() {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
    assert_eq!(dense_eigenvalues(&d), vec![1.0, 2.0, 3.0]);
    let (a, b, c): (f64, f64, f64) = (0.3, -1.1, 2.0);
    let m = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    let ev = dense_eigenvalues(&m);
    assert!((ev[0] - (a + c - disc) / 2.0).abs() < 1e-14);
    assert!((ev[1] - (a + c + disc) / 2.0).abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = random_symmetric(&mut rng, 12);
    let gamma = 0.8125;
    let shifted = &r - DMatrix::identity(12, 12) * gamma;
    for (x, y) in dense_eigenvalues(&r).iter().zip(dense_eigenvalues(&shifted)) {
        assert!((x - gamma - y).abs() < 1e-12);
    }
}

#[test]
fn counting_examples() {
    let spec = dense_eigen(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0])));
    assert_eq!(counting_function(&spec, 2.5).unwrap(), 2);
    assert_eq!(counting_function(&spec, 0.5).unwrap(), 0);
    assert_eq!(counting_function(&spec, 3.0).unwrap(), 3);
    let a = CsrMatrix::from_dense(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0])));
    assert_eq!(count_at_most(&a, 2.5), 2);
    assert_eq!(count_at_most(&a, 0.5), 0);
}

#[test]
fn partial_spectrum_is_unresolved_above_its_top() {
    let a = tridiagonal(40, 2.0, -1.0);
    let part = lowest_eigenpairs(&a, &SolverConfig::lowest(3).iterative_only()).unwrap();
    assert!(!part.complete);
    assert!(counting_function(&part, part.eigenvalues[1]).is_ok());
    assert!(matches!(counting_function(&part, 3.9), Err(Error::Unresolved { .. })));
}

#[test]
fn inertia_count_matches_dense_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = BoxGrid::centered(2, 1, 4).unwrap();
    let z = vec![0.0; grid.dof()];
    let w: Vec<f64> = (0..grid.dof()).map(|_| rng.gen_range(0.0..30.0)).collect();
    let h = assemble_hamiltonian(&LatticeGeometry::cubic(2).unwrap(), &z, &w, &grid, &BoundaryCondition::Dirichlet).unwrap();
    let ev = dense_eigenvalues(&h.matrix.to_dense());
    for e in [-1.0, 50.0, 200.0, 500.0, 1000.0, 2000.0] {
        assert_eq!(count_at_most(&h.matrix, e), ev.iter().filter(|&&v| v <= e).count(), "E = {e}");
    }
}
