use breather_lab::operators::BoxGrid;
use breather_lab::potential::*;

fn model(d: usize, coupling: f64, base: BaseSet, law: CouplingLaw) -> PotentialModel {
    PotentialModel::iid(LatticeGeometry::cubic(d).unwrap(), SingleSitePotential::standard(coupling, base), law)
}

fn custom(value: f64, region: BaseSet) -> PotentialModel {
    PotentialModel::iid(
        LatticeGeometry::cubic(1).unwrap(),
        SingleSitePotential::Custom { levels: vec![CustomLevel { from: 0.0, value, region }] },
        CouplingLaw::uniform(),
    )
}

#[test]
fn same_seed_and_index_reproduce_the_coupling() {
    let m = model(1, 1.0, BaseSet::Cell, CouplingLaw::uniform());
    let sites = SiteBox::centered(1, 0);
    let a = sample_realization(&m, &sites, 42, 0).unwrap();
    let b = sample_realization(&m, &sites, 42, 0).unwrap();
    assert_eq!(a.lambdas.len(), 1);
    assert!((0.0..=1.0).contains(&a.lambdas[0]));
    assert_eq!(a.lambdas[0].to_bits(), b.lambdas[0].to_bits());
    assert_ne!(a.lambdas, sample_realization(&m, &sites, 42, 1).unwrap().lambdas);
}

#[test]
fn point_mass_fills_every_site() {
    let m = model(1, 1.0, BaseSet::Cell, CouplingLaw::PointMass { value: 1.0 });
    let r = sample_realization(&m, &SiteBox::centered(1, 1), 3, 9).unwrap();
    assert_eq!(r.lambdas, vec![1.0; 3]);
}

#[test]
fn uniform_sample_mean_is_one_half() {
    let m = model(1, 1.0, BaseSet::Cell, CouplingLaw::uniform());
    let r = sample_realization(&m, &SiteBox::centered(1, 5000), 1, 0).unwrap();
    let mean = r.lambdas.iter().sum::<f64>() / r.lambdas.len() as f64;
    assert!((mean - 0.5).abs() < 0.02, "{mean}");
}

#[test]
fn breather_point_values() {
    let m = model(1, 2.0, BaseSet::Cell, CouplingLaw::uniform());
    let sites = SiteBox::centered(1, 0);
    let one = Realization::fixed(sites.clone(), vec![1.0]).unwrap();
    assert_eq!(evaluate_potential(&m, &one, &[0.0]).value, 2.0);
    let zero = Realization::fixed(sites, vec![0.0]).unwrap();
    for x in [-0.4, 0.0, 0.2] {
        assert_eq!(evaluate_potential(&m, &zero, &[x]).value, 0.0);
    }
}

#[test]
fn ball_membership_in_two_dimensions() {
    let m = model(2, 1.0, BaseSet::Ball { radius: 1.0 }, CouplingLaw::uniform());
    let r = Realization::fixed(SiteBox::centered(2, 0), vec![0.5]).unwrap();
    // |(0.4, 0.4)| ≈ 0.566 lies outside the ball of radius ½
    assert_eq!(evaluate_potential(&m, &r, &[0.4, 0.4]).value, 0.0);
    assert_eq!(evaluate_potential(&m, &r, &[0.3, 0.3]).value, 1.0);
}

#[test]
fn grid_function_vanishes_and_is_monotone() {
    let m = model(1, 1.0, BaseSet::HalfCell, CouplingLaw::uniform());
    let grid = BoxGrid::centered(1, 2, 16).unwrap();
    let sites = grid.sites();
    let zero = Realization::fixed(sites.clone(), vec![0.0; 5]).unwrap();
    assert!(evaluate_on_grid(&m, &zero, &grid).iter().all(|&v| v == 0.0));
    let mut l = vec![0.2, 0.9, 0.3, 0.5, 0.7];
    let before = evaluate_on_grid(&m, &Realization::fixed(sites.clone(), l.clone()).unwrap(), &grid);
    l[2] = 0.6;
    let after = evaluate_on_grid(&m, &Realization::fixed(sites, l).unwrap(), &grid);
    assert!(before.iter().zip(&after).all(|(b, a)| a >= b));
    assert!(after.iter().sum::<f64>() > before.iter().sum::<f64>());
}

#[test]
fn indicator_quadrature_converges_to_area() {
    for d in [1usize, 2] {
        let m = model(d, 1.0, BaseSet::HalfCell, CouplingLaw::uniform());
        let n_h = 32;
        let grid = BoxGrid::unit_cell(d, n_h).unwrap();
        let r = Realization::fixed(grid.sites(), vec![1.0]).unwrap();
        let w = evaluate_on_grid(&m, &r, &grid);
        let frac = w.iter().filter(|&&v| v > 0.0).count() as f64 / w.len() as f64;
        let area = 0.5f64.powi(d as i32);
        assert!((frac - area).abs() <= 2.0 * d as f64 / n_h as f64, "d = {d}: {frac} vs {area}");
    }
}

#[test]
fn cutoff_support_matches_thresholding() {
    let tent = SingleSitePotential::GeneralBreather { profile: Profile::Tent { peak: 1.0, radius: 0.5 } };
    let cut = cutoff_simplify(&tent, 0.5).unwrap();
    let base = PotentialModel::iid(LatticeGeometry::cubic(1).unwrap(), tent, CouplingLaw::uniform());
    let reduced = PotentialModel { single_site: cut, ..base.clone() };
    let grid = BoxGrid::unit_cell(1, 64).unwrap();
    let r = Realization::fixed(grid.sites(), vec![1.0]).unwrap();
    let raw = evaluate_on_grid(&base, &r, &grid);
    let red = evaluate_on_grid(&reduced, &r, &grid);
    for (u, v) in raw.iter().zip(&red) {
        assert_eq!(*v, if *u >= 0.5 { 0.5 } else { 0.0 });
    }
    // tent ≥ ½ on |x| ≤ ¼: half of the cell
    let measure = red.iter().filter(|&&v| v > 0.0).count() as f64 / 64.0;
    assert!((measure - 0.5).abs() <= 1.0 / 32.0);
    // u < μ everywhere gives ũ ≡ 0
    let high = PotentialModel { single_site: cutoff_simplify(&base.single_site, 2.0).unwrap(), ..base };
    assert!(evaluate_on_grid(&high, &r, &grid).iter().all(|&v| v == 0.0));
}

#[test]
fn non_degeneracy_margin_examples() {
    let half = custom(1.0, BaseSet::Rect { lo: vec![0.0], hi: vec![0.5] });
    let m = non_degeneracy_margin(&half, 50, 0, 8).unwrap();
    assert_eq!(m.estimate, 0.5);
    assert_eq!(m.half_width, 0.0);
    assert_eq!(non_degeneracy_margin(&custom(0.0, BaseSet::Cell), 50, 0, 8).unwrap().estimate, 0.0);

    let bre = model(1, 1.0, BaseSet::Cell, CouplingLaw::uniform());
    let m = non_degeneracy_margin(&bre, 4000, 3, 64).unwrap();
    let sigma = m.half_width / 1.96;
    assert!((m.estimate - 0.5).abs() <= 3.0 * sigma + 1.0 / 64.0, "{m:?}");
}

#[test]
fn mu_check_examples() {
    assert!(mu_nondegeneracy_check(&custom(1.0, BaseSet::Cell), 0.5, 100, 0, 8).unwrap().pass);
    let none = mu_nondegeneracy_check(&custom(0.0, BaseSet::Cell), 0.1, 100, 0, 8).unwrap();
    assert!(!none.pass);
    assert_eq!(none.probability, 0.0);
    let bre = model(1, 1.0, BaseSet::Cell, CouplingLaw::uniform());
    let c = mu_nondegeneracy_check(&bre, 0.2, 4000, 5, 32).unwrap();
    assert!(c.pass);
    // P{λ ≥ 0.2} = 0.8 up to the grid resolution of |λA|
    assert!((c.probability - 0.8).abs() < 0.04, "{c:?}");
}

#[test]
fn config_validation_names_fields() {
    let mut m = model(1, -1.0, BaseSet::Cell, CouplingLaw::Uniform { lo: 0.5, hi: 0.2 });
    m.laws.push(CouplingLaw::PointMass { value: 0.0 });
    let errs = m.validate();
    assert!(errs.iter().any(|e| e.contains("coupling")), "{errs:?}");
    assert!(errs.iter().any(|e| e.starts_with("laws[0]")), "{errs:?}");
    assert!(errs.iter().any(|e| e.starts_with("laws[1]")), "{errs:?}");
}

#[test]
fn model_serde_round_trip() {
    let m = model(2, 1.5, BaseSet::Ball { radius: 0.4 }, CouplingLaw::AtomAtZero {
        weight: 0.25,
        rest: Box::new(CouplingLaw::uniform()),
    })
    .with_background(PeriodicBackground::cosine(0.7));
    let text = toml::to_string(&m).unwrap();
    let back: PotentialModel = toml::from_str(&text).unwrap();
    assert_eq!(back, m);
}
