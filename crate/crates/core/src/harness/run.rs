use std::path::Path;
use std::time::Instant;

use serde_json::json;

use super::config::{Experiment, ExperimentConfig, TailParams};
use super::record::{write_record, Cell, ExperimentRecord, Table, WrittenRecord, RECORD_FORMAT, RECORD_VERSION};
use crate::bounds::{gap_constant, run_certifications, ProofConstants, SuiteReport};
use crate::eigensolve::{lowest_eigenpairs, SolverConfig};
use crate::error::{Context, Error, Result};
use crate::operators::{periodic_ground_state, BcKind};
use crate::potential::find_nondegeneracy_level;
use crate::seed;
use crate::spectral_stats::{
    calibrate_ilse, cell_shells, centre_cell, ct_decay, e0_identification, fit_lifshitz_exponent, ids_curve,
    ilse_probability, lower_bound_witness, summable_decay_margin, tail_probability, BoxSetup, Campaign, CountingMode,
    IlseConstants, TailEstimate,
};

/// Fixed flat-table columns of every experiment kind.
pub fn table_columns(kind: &str) -> &'static [&'static str] {
    match kind {
        "spectrum" => &["sample", "index", "eigenvalue", "offset", "residual"],
        "ids" => &["bc", "offset", "energy", "mean", "std_err", "ci_lo", "ci_hi"],
        "tail" => &["offset", "energy", "level", "samples", "hits", "p_hat", "ci_lo", "ci_hi", "bound", "out_of_regime"],
        "lifshitz-fit" => &["offset", "value", "ln_offset", "ln_neg_ln_value", "fitted"],
        "bounds-check" => &["suite", "instances", "checked", "failures", "worst_margin", "pass"],
        "e0" => &[
            "level", "alpha", "samples", "hits", "p_hat", "ci_lo", "ci_hi", "exact", "rayleigh_mean", "rayleigh_max",
            "min_e1_offset", "bound",
        ],
        "lower-bound" => &["offset", "energy", "length", "hits", "p_hat", "ci_lo", "ci_hi", "ids_lower", "ids_dirichlet", "chain_holds"],
        "ct-decay" => &["realization", "mode", "parameter", "energy", "e1", "distance", "norm", "rate", "residual", "rate_ratio"],
        "ilse" => &["sample", "norm", "threshold", "good"],
        _ => &[],
    }
}

struct Outcome {
    results: serde_json::Value,
    table: Table,
    certifications: Vec<SuiteReport>,
}

impl Outcome {
    fn new(results: serde_json::Value, table: Table) -> Self {
        Outcome {
            results,
            table,
            certifications: Vec::new(),
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn check_report(name: &str, outcomes: impl IntoIterator<Item = (bool, f64)>) -> SuiteReport {
    let mut r = SuiteReport {
        name: name.to_string(),
        instances: 0,
        checked: 0,
        failures: 0,
        worst_margin: f64::NEG_INFINITY,
        pass: true,
    };
    for (ok, margin) in outcomes {
        r.instances += 1;
        r.checked += 1;
        r.worst_margin = r.worst_margin.max(margin);
        if !ok {
            r.failures += 1;
            r.pass = false;
        }
    }
    r
}

/// Run the experiment described by `cfg` without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let campaign = Campaign::new(cfg.run.seed, cfg.run.samples).with_jobs(cfg.run.jobs);
    let n_h = cfg.grid.n_h;
    let model = &cfg.model;
    let outcome = match &cfg.experiment {
        Experiment::Spectrum { level, bc, k } => spectrum(cfg, *level, *bc, *k, &campaign),
        Experiment::Ids { level, bcs, energies, k } => {
            let e0 = periodic_ground_state(&model.geometry, &model.background, n_h)
                .within("operators", "periodic_ground_state")?
                .e0;
            let offsets = energies.resolve()?;
            let absolute: Vec<f64> = offsets.iter().map(|o| e0 + o).collect();
            let mode = k.map_or(CountingMode::Inertia, CountingMode::Lowest);
            let curve = ids_curve(model, bcs, *level, &absolute, n_h, &campaign, mode).within("spectral_stats", "ids_curve")?;
            let mut table = Table::new(table_columns("ids"));
            for p in &curve.points {
                table.push(vec![
                    Cell::text(p.bc.name()),
                    Cell::float(p.energy - e0),
                    Cell::float(p.energy),
                    Cell::float(p.mean),
                    Cell::float(p.std_err),
                    Cell::float(p.interval.lo),
                    Cell::float(p.interval.hi),
                ]);
            }
            Ok(Outcome::new(to_json(&curve), table))
        }
        Experiment::Tail(t) => {
            let (constants, extra) = tail_constants(cfg, t)?;
            let offsets = t.energies.resolve()?;
            let est = tail_probability(model, t.bc, &offsets, &constants, n_h, &campaign)
                .within("spectral_stats", "tail_probability")?;
            Ok(Outcome::new(
                json!({ "bc": t.bc, "constants": constants, "derived": extra, "estimates": est }),
                tail_table(&est),
            ))
        }
        Experiment::LifshitzFit { points, tail } => {
            let (data, extra) = match tail {
                Some(t) => {
                    let (constants, extra) = tail_constants(cfg, t)?;
                    let offsets = t.energies.resolve()?;
                    let est = tail_probability(model, t.bc, &offsets, &constants, n_h, &campaign)
                        .within("spectral_stats", "tail_probability")?;
                    let data: Vec<(f64, f64)> = est
                        .iter()
                        .filter(|e| !e.out_of_regime && e.p_hat > 0.0 && e.p_hat < 1.0)
                        .map(|e| (e.offset, e.p_hat))
                        .collect();
                    (data, json!({ "constants": constants, "derived": extra, "estimates": est }))
                }
                None => (points.iter().map(|p| (p[0], p[1])).collect(), serde_json::Value::Null),
            };
            let fit = fit_lifshitz_exponent(&data).within("spectral_stats", "fit_lifshitz_exponent")?;
            let mut table = Table::new(table_columns("lifshitz-fit"));
            for &(x, v) in &data {
                table.push(vec![
                    Cell::float(x),
                    Cell::float(v),
                    Cell::float(x.ln()),
                    Cell::float((-v.ln()).ln()),
                    Cell::float(fit.intercept + fit.slope * x.ln()),
                ]);
            }
            Ok(Outcome::new(
                json!({ "fit": fit, "target_slope": -(model.dim() as f64) / 2.0, "tail": extra }),
                table,
            ))
        }
        Experiment::BoundsCheck { sizes } => {
            let reports = run_certifications(sizes, cfg.run.seed).within("bounds", "run_certifications")?;
            let mut table = Table::new(table_columns("bounds-check"));
            for r in &reports {
                table.push(vec![
                    Cell::text(&r.name),
                    Cell::int(r.instances),
                    Cell::int(r.checked),
                    Cell::int(r.failures),
                    Cell::float(r.worst_margin),
                    Cell::Bool(r.pass),
                ]);
            }
            Ok(Outcome {
                results: json!({ "sizes": sizes }),
                table,
                certifications: reports,
            })
        }
        Experiment::E0 { levels, alphas, cperp } => {
            let report =
                e0_identification(model, levels, alphas, n_h, &campaign, *cperp).within("spectral_stats", "e0_identification")?;
            let mut table = Table::new(table_columns("e0"));
            for r in &report.rows {
                table.push(vec![
                    Cell::int(r.level),
                    Cell::float(r.alpha),
                    Cell::int(r.samples),
                    Cell::int(r.hits),
                    Cell::float(r.p_hat),
                    Cell::float(r.interval.lo),
                    Cell::float(r.interval.hi),
                    Cell::float(r.exact),
                    Cell::opt_float(r.rayleigh_mean),
                    Cell::opt_float(r.rayleigh_max),
                    Cell::float(r.min_e1_offset),
                    Cell::float(r.bound),
                ]);
            }
            Ok(Outcome::new(to_json(&report), table))
        }
        Experiment::LowerBound { level, energies, decay, radius, error } => {
            lower_bound(cfg, *level, &energies.resolve()?, decay, *radius, *error, &campaign)
        }
        Experiment::CtDecay { level, fractions, gaps, max_shell, realizations } => {
            ct(cfg, *level, fractions, gaps, *max_shell, *realizations)
        }
        Experiment::Ilse { ell, kappa, c1, c2, c_prime, calibration_samples, fractions } => {
            let (constants, calibration) = match (c1, c2, c_prime) {
                (Some(c1), Some(c2), Some(c_prime)) => (IlseConstants { c1: *c1, c2: *c2, c_prime: *c_prime }, None),
                _ => {
                    let calib = Campaign::new(seed::derive(&[cfg.run.seed, 0xca11b]), *calibration_samples).with_jobs(cfg.run.jobs);
                    let c = calibrate_ilse(model, *ell, *kappa, n_h, &calib, fractions).within("spectral_stats", "calibrate_ilse")?;
                    let merged = IlseConstants {
                        c1: c1.unwrap_or(c.constants.c1),
                        c2: c2.unwrap_or(c.constants.c2),
                        c_prime: c_prime.unwrap_or(c.constants.c_prime),
                    };
                    (merged, Some(c))
                }
            };
            let report =
                ilse_probability(model, *ell, *kappa, &constants, n_h, &campaign).within("spectral_stats", "ilse_probability")?;
            let mut table = Table::new(table_columns("ilse"));
            for (i, &n) in report.norms.iter().enumerate() {
                table.push(vec![Cell::int(i), Cell::float(n), Cell::float(report.threshold), Cell::Bool(n <= report.threshold)]);
            }
            let mut summary = to_json(&report);
            if let Some(obj) = summary.as_object_mut() {
                obj.remove("norms");
            }
            Ok(Outcome::new(json!({ "constants": constants, "calibration": calibration, "report": summary }), table))
        }
    }?;
    let pass = outcome.certifications.iter().all(|c| c.pass);
    Ok(ExperimentRecord {
        format: RECORD_FORMAT.into(),
        version: RECORD_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        kind: cfg.experiment.kind().into(),
        config_hash: cfg.hash_hex(),
        seed: cfg.run.seed,
        samples: cfg.run.samples,
        jobs: cfg.run.jobs,
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        results: outcome.results,
        table: outcome.table,
        certifications: outcome.certifications,
        pass,
    })
}

/// Run `cfg` and persist its record and flat table under `cfg.run.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentRecord, WrittenRecord)> {
    let record = execute(cfg)?;
    let written = write_record(&record, Path::new(&cfg.run.out)).within("harness", "write_record")?;
    Ok((record, written))
}

fn spectrum(cfg: &ExperimentConfig, level: usize, bc: BcKind, k: usize, campaign: &Campaign) -> Result<Outcome> {
    let setup = BoxSetup::new(&cfg.model, level, cfg.grid.n_h).within("spectral_stats", "box_setup")?;
    let b = setup.bc(bc).within("operators", "boundary_condition")?;
    let e0 = setup.e0();
    let k = k.min(setup.grid.dof());
    let spectra = campaign
        .map(|i| {
            let h = setup.sample(campaign.seed, i, &b)?;
            lowest_eigenpairs(&h.matrix, &SolverConfig::lowest(k))
        })
        .within("eigensolve", "lowest_eigenpairs")?;
    let mut table = Table::new(table_columns("spectrum"));
    for (i, s) in spectra.iter().enumerate() {
        for (j, (&v, &r)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
            table.push(vec![Cell::int(i), Cell::int(j + 1), Cell::float(v), Cell::float(v - e0), Cell::float(r)]);
        }
    }
    Ok(Outcome::new(
        json!({ "level": level, "bc": bc, "e0": e0, "dof": setup.grid.dof(), "volume": setup.volume() }),
        table,
    ))
}

/// Cgap, μ and β as configured, filling gaps from the model.
fn tail_constants(cfg: &ExperimentConfig, t: &TailParams) -> Result<(ProofConstants, serde_json::Value)> {
    let model = &cfg.model;
    let n_h = cfg.grid.n_h;
    let mut extra = serde_json::Map::new();
    let cgap = match t.cgap {
        Some(c) => c,
        None => {
            let g = gap_constant(&model.geometry, &model.background, n_h, &t.gap_levels).within("bounds", "gap_constant")?;
            extra.insert("gap".into(), to_json(&g));
            g.cgap
        }
    };
    let mu = match t.mu {
        Some(m) => m,
        None => {
            let found = find_nondegeneracy_level(model, t.nondegeneracy_samples, seed::derive(&[cfg.run.seed, 0x6d75]), n_h)
                .within("potential", "find_nondegeneracy_level")?;
            let m = found.ok_or_else(|| {
                Error::HypothesisViolated("no non-degeneracy level mu >= 2^-10 passes; set experiment.mu".into())
                    .within("potential", "find_nondegeneracy_level")
            })?;
            extra.insert("mu".into(), json!(m));
            m
        }
    };
    let mut constants = match t.beta {
        Some(b) => ProofConstants::new(cgap, mu, b),
        None => {
            let ground = periodic_ground_state(&model.geometry, &model.background, n_h).within("operators", "periodic_ground_state")?;
            ProofConstants::from_ground_state(cgap, mu, ground.psi_min)
        }
    }
    .within("bounds", "proof_constants")?;
    if let Some(d) = t.delta {
        constants = constants.with_delta(d);
    }
    Ok((constants, serde_json::Value::Object(extra)))
}

fn tail_table(est: &[TailEstimate]) -> Table {
    let mut table = Table::new(table_columns("tail"));
    for e in est {
        table.push(vec![
            Cell::float(e.offset),
            Cell::float(e.energy),
            e.level.map_or(Cell::Empty, Cell::int),
            Cell::int(e.samples),
            Cell::int(e.hits),
            Cell::float(e.p_hat),
            Cell::float(e.interval.lo),
            Cell::float(e.interval.hi),
            Cell::float(e.bound),
            Cell::Bool(e.out_of_regime),
        ]);
    }
    table
}

fn lower_bound(
    cfg: &ExperimentConfig,
    level: usize,
    offsets: &[f64],
    decay: &crate::spectral_stats::LowerBoundConfig,
    radius: f64,
    error: f64,
    campaign: &Campaign,
) -> Result<Outcome> {
    let model = &cfg.model;
    let n_h = cfg.grid.n_h;
    decay.check().within("spectral_stats", "lower_bound_config")?;
    let e0 = periodic_ground_state(&model.geometry, &model.background, n_h)
        .within("operators", "periodic_ground_state")?
        .e0;
    let energies: Vec<f64> = offsets.iter().map(|o| e0 + o).collect();
    let witness = lower_bound_witness(model, level, &energies, n_h, campaign).within("spectral_stats", "lower_bound_witness")?;
    let ids = ids_curve(model, &[BcKind::Dirichlet], level, &energies, n_h, campaign, CountingMode::Inertia)
        .within("spectral_stats", "ids_curve")?;
    let margin = summable_decay_margin(decay, model, radius, error).within("spectral_stats", "summable_decay_margin")?;
    let cblubb = witness.cutoff.cblubb;
    let mut table = Table::new(table_columns("lower-bound"));
    let mut chain = Vec::new();
    for ((row, p), &offset) in witness.rows.iter().zip(&ids.points).zip(offsets) {
        let holds = p.mean >= row.ids_lower;
        chain.push((holds, row.ids_lower - p.mean));
        table.push(vec![
            Cell::float(offset),
            Cell::float(row.energy),
            decay.length(cblubb, offset).map_or(Cell::Empty, Cell::int),
            Cell::int(row.hits),
            Cell::float(row.p_hat),
            Cell::float(row.interval.lo),
            Cell::float(row.interval.hi),
            Cell::float(row.ids_lower),
            Cell::float(p.mean),
            Cell::Bool(holds),
        ]);
    }
    let decomposition = check_report(
        "cutoff-decomposition",
        witness.samples.iter().map(|s| {
            let excess = s.quotient - witness.e0 - s.potential_term - cblubb / (level * level) as f64;
            (s.decomposition_holds, excess)
        }),
    );
    let mut summary = to_json(&witness);
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("samples");
    }
    Ok(Outcome {
        results: json!({ "witness": summary, "decay_margin": margin, "eps_bar": decay.eps_bar() }),
        table,
        certifications: vec![check_report("lower-bound-chain", chain), decomposition],
    })
}

fn ct(cfg: &ExperimentConfig, level: usize, fractions: &[f64], gaps: &[f64], max_shell: Option<usize>, realizations: usize) -> Result<Outcome> {
    let setup = BoxSetup::new(&cfg.model, level, cfg.grid.n_h).within("spectral_stats", "box_setup")?;
    let bc = setup.bc(BcKind::Dirichlet).within("operators", "boundary_condition")?;
    let targets = cell_shells(&setup.grid, max_shell.unwrap_or(level).min(level));
    let source = centre_cell(&setup.grid);
    let mut table = Table::new(table_columns("ct-decay"));
    let mut fits = Vec::new();
    for r in 0..realizations as u64 {
        let h = setup.sample(cfg.run.seed, r, &bc).within("spectral_stats", "box_setup")?;
        let e1 = lowest_eigenpairs(&h.matrix, &SolverConfig { tol: 1e-10, ..SolverConfig::lowest(1) })
            .within("eigensolve", "lowest_eigenpairs")?
            .eigenvalues[0];
        let requests = fractions
            .iter()
            .map(|&f| ("fraction", f, f * e1))
            .chain(gaps.iter().map(|&g| ("gap", g, e1 - g)));
        for (mode, parameter, energy) in requests {
            let fit = ct_decay(&h, energy, &source, &targets).within("spectral_stats", "ct_decay")?;
            for (d, n) in fit.distances.iter().zip(&fit.norms) {
                table.push(vec![
                    Cell::int(r),
                    Cell::text(mode),
                    Cell::float(parameter),
                    Cell::float(energy),
                    Cell::float(fit.e1),
                    Cell::float(*d),
                    Cell::float(*n),
                    Cell::float(fit.rate),
                    Cell::float(fit.residual),
                    Cell::float(fit.rate_ratio),
                ]);
            }
            fits.push(json!({ "realization": r, "mode": mode, "parameter": parameter, "fit": fit }));
        }
    }
    Ok(Outcome::new(json!({ "level": level, "fits": fits }), table))
}
