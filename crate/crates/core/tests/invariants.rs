use breather_lab::bounds::{certify_thirring_corollary, ProofConstants, ThirringInput};
use breather_lab::eigensolve::{count_at_most, dense_eigenvalues, lowest_eigenpairs, SolverConfig};
use breather_lab::harness::parse_config;
use breather_lab::operators::{assemble_hamiltonian, boundary_condition, periodic_ground_state, BcKind, BoxGrid};
use breather_lab::potential::{
    cutoff_simplify, evaluate_on_grid, sample_realization, BaseSet, CouplingLaw, LatticeGeometry, PeriodicBackground,
    PotentialModel, Profile, Realization, SingleSitePotential, SiteBox,
};
use breather_lab::spectral_stats::{
    cell_shells, centre_cell, ct_decay, fit_lifshitz_exponent, ids_curve, lower_bound_witness, tail_probability,
    wilson_interval, BoxSetup, Campaign, CountingMode,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn breather(base: BaseSet) -> PotentialModel {
    PotentialModel::iid(LatticeGeometry::cubic(1).unwrap(), SingleSitePotential::standard(1.0, base), CouplingLaw::uniform())
        .with_background(PeriodicBackground::cosine(1.0))
}

fn spectra(model: &PotentialModel, level: usize, lambdas: Vec<f64>) -> [Vec<f64>; 3] {
    let ground = periodic_ground_state(&model.geometry, &model.background, 4).unwrap();
    let grid = BoxGrid::centered(1, level, 4).unwrap();
    let real = Realization::fixed(grid.sites(), lambdas).unwrap();
    let w = evaluate_on_grid(model, &real, &grid);
    let vper = model.background.on_grid(&grid).unwrap();
    [BcKind::Neumann, BcKind::Mezincescu, BcKind::Dirichlet].map(|k| {
        let bc = boundary_condition(k, Some(&ground), &grid).unwrap();
        dense_eigenvalues(&assemble_hamiltonian(&model.geometry, &vper, &w, &grid, &bc).unwrap().matrix.to_dense())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neumann_mezincescu_dirichlet_ordering(lambdas in prop::collection::vec(0.0f64..=1.0, 5)) {
        let [n, m, d] = spectra(&breather(BaseSet::HalfCell), 2, lambdas);
        for k in 0..n.len() {
            prop_assert!(n[k] <= m[k] + 1e-10 && m[k] <= d[k] + 1e-10, "k = {}: {} {} {}", k, n[k], m[k], d[k]);
        }
    }

    #[test]
    fn split_counts_order_by_boundary_condition(
        lambdas in prop::collection::vec(0.0f64..=1.0, 5),
        at in 1usize..5,
        e in -1.0f64..400.0,
    ) {
        let model = breather(BaseSet::Cell);
        let ground = periodic_ground_state(&model.geometry, &model.background, 4).unwrap();
        let grid = BoxGrid::centered(1, 2, 4).unwrap();
        let real = Realization::fixed(grid.sites(), lambdas).unwrap();
        let w = evaluate_on_grid(&model, &real, &grid);
        let (a, b) = grid.split(0, at).unwrap();
        let count = |g: &BoxGrid, w: &[f64], k: BcKind| {
            let bc = boundary_condition(k, Some(&ground), g).unwrap();
            let h = assemble_hamiltonian(&model.geometry, &model.background.on_grid(g).unwrap(), w, g, &bc).unwrap();
            count_at_most(&h.matrix, e)
        };
        let (wa, wb) = w.split_at(a.dof());
        for k in [BcKind::Dirichlet, BcKind::Neumann, BcKind::Mezincescu] {
            let (full, parts) = (count(&grid, &w, k), count(&a, wa, k) + count(&b, wb, k));
            if k == BcKind::Dirichlet {
                prop_assert!(full >= parts, "{} {} {}", k, full, parts);
            } else {
                prop_assert!(full <= parts, "{} {} {}", k, full, parts);
            }
        }
    }

    #[test]
    fn realizations_are_reproducible_and_nested(seed in any::<u64>(), sample in 0u64..1000, level in 1usize..4) {
        let model = breather(BaseSet::Cell);
        let big = SiteBox::centered(2, level + 1);
        let small = SiteBox::centered(2, level);
        let m2 = PotentialModel { geometry: LatticeGeometry::cubic(2).unwrap(), ..model };
        let a = sample_realization(&m2, &big, seed, sample).unwrap();
        let b = sample_realization(&m2, &big, seed, sample).unwrap();
        prop_assert_eq!(&a, &b);
        let s = sample_realization(&m2, &small, seed, sample).unwrap();
        for k in small.sites() {
            prop_assert_eq!(s.lambda_at(&k), a.lambda_at(&k));
        }
    }

    #[test]
    fn wilson_interval_brackets_estimate(n in 1usize..5000, frac in 0.0f64..=1.0) {
        let hits = ((n as f64) * frac).floor() as usize;
        let ci = wilson_interval(hits, n);
        let p = hits as f64 / n as f64;
        prop_assert!(0.0 <= ci.lo && ci.lo <= p + 1e-12 && p <= ci.hi + 1e-12 && ci.hi <= 1.0);
    }

    #[test]
    fn lifshitz_fit_recovers_exponent(a_idx in 0usize..3, c in 0.05f64..0.5, x0 in 0.01f64..0.1, ratio in 1.2f64..2.0) {
        let a = [0.5, 1.0, 1.5][a_idx];
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|i| x0 * ratio.powi(i))
            .map(|x| (x, (-c * x.powf(-a)).exp()))
            .filter(|(_, v)| *v > 0.0 && *v < 1.0)
            .collect();
        prop_assume!(pts.len() >= 2);
        let fit = fit_lifshitz_exponent(&pts).unwrap();
        prop_assert!((fit.slope + a).abs() < 1e-6, "{} vs {}", fit.slope, -a);
    }

    #[test]
    fn thirring_corollary_holds(seed in any::<u64>(), n in 1usize..=8) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let h = (&a + a.transpose()) * 0.5;
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..3.0)).collect();
        let c = certify_thirring_corollary(&ThirringInput::new(h, v).unwrap(), 1e-10).unwrap();
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn cutoff_never_raises_the_bottom(seed in any::<u64>(), mu in 0.1f64..1.0) {
        let tent = SingleSitePotential::GeneralBreather { profile: Profile::Tent { peak: 1.5, radius: 0.5 } };
        let m = PotentialModel::iid(LatticeGeometry::cubic(1).unwrap(), tent.clone(), CouplingLaw::uniform());
        let cut = PotentialModel { single_site: cutoff_simplify(&tent, mu).unwrap(), ..m.clone() };
        let e1 = |model: &PotentialModel| {
            let s = BoxSetup::new(model, 2, 4).unwrap();
            let h = s.sample(seed, 0, &s.bc(BcKind::Mezincescu).unwrap()).unwrap();
            lowest_eigenpairs(&h.matrix, &SolverConfig::lowest(1)).unwrap().eigenvalues[0]
        };
        prop_assert!(e1(&cut) <= e1(&m) + 1e-10);
    }

    #[test]
    fn critical_length_floor(cgap in 0.5f64..10.0, beta in 0.01f64..1.0, offset in 1e-4f64..1.0) {
        let c = ProofConstants::new(cgap, 1.0, beta).unwrap();
        if let Ok(l) = c.critical_length(offset, 0.0) {
            let exact = (c.delta() / offset).sqrt();
            prop_assert!(l as f64 <= exact * (1.0 + 1e-9) && (l + 1) as f64 > exact);
        }
    }

    #[test]
    fn config_hash_survives_round_trip(seed in 0u64..(i64::MAX as u64), samples in 1usize..100_000, level in 1usize..20) {
        let text = format!(
            "[model.geometry]\ndimension = 1\n[model.single_site]\ntype = \"standard-breather\"\ncoupling = 1.0\nbase = {{ shape = \"cell\" }}\n[[model.laws]]\nlaw = \"uniform\"\n[experiment]\nkind = \"spectrum\"\nlevel = {level}\n[run]\nseed = {seed}\nsamples = {samples}\n"
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(cfg.hash(), again.hash());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tail_estimates_decrease_with_energy(seed in any::<u64>()) {
        let model = breather(BaseSet::HalfCell);
        let constants = ProofConstants::new(2.4, 1.0, 0.5).unwrap().with_delta(2.0);
        let offsets = [0.08, 0.12, 0.18, 0.27];
        let est = tail_probability(&model, BcKind::Mezincescu, &offsets, &constants, 4, &Campaign::new(seed, 150)).unwrap();
        for w in est.windows(2) {
            prop_assert!(w[0].interval.lo <= w[1].interval.hi, "{:?}", w);
        }
    }

    #[test]
    fn chain_holds_at_matched_seeds(seed in any::<u64>(), level in 1usize..4) {
        let model = breather(BaseSet::HalfCell);
        let e0 = periodic_ground_state(&model.geometry, &model.background, 4).unwrap().e0;
        let energies = [e0 + 0.3, e0 + 0.9];
        let c = Campaign::new(seed, 40);
        let w = lower_bound_witness(&model, level, &energies, 4, &c).unwrap();
        let ids = ids_curve(&model, &[BcKind::Dirichlet], level, &energies, 4, &c, CountingMode::Inertia).unwrap();
        prop_assert!(w.decomposition_holds);
        for (r, p) in w.rows.iter().zip(&ids.points) {
            prop_assert!(p.mean >= r.ids_lower);
        }
    }

    #[test]
    fn ct_rate_is_positive_below_the_bottom(seed in any::<u64>(), frac in 0.05f64..0.95) {
        let model = breather(BaseSet::Cell);
        let s = BoxSetup::new(&model, 4, 4).unwrap();
        let h = s.sample(seed, 0, &s.bc(BcKind::Dirichlet).unwrap()).unwrap();
        let e1 = lowest_eigenpairs(&h.matrix, &SolverConfig { tol: 1e-10, ..SolverConfig::lowest(1) }).unwrap().eigenvalues[0];
        let e = e1 - frac;
        let fit = ct_decay(&h, e, &centre_cell(&s.grid), &cell_shells(&s.grid, 4)).unwrap();
        prop_assert!(fit.rate > 0.0, "{:?}", fit);
    }
}
