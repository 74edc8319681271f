use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use breather_lab::harness::{parse_with_overrides, run_experiment, Overrides};
use breather_lab::Error;

#[derive(Parser)]
#[command(name = "breather-lab", version, about = "Finite-box spectral experiments for random breather operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides run.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Samples per estimate (overrides run.samples).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads; never changes results.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (overrides run.out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Lowest eigenvalues per sample.
    Spectrum,
    /// Finite-volume IDS under several boundary conditions.
    Ids,
    /// Spectral-bottom tail probabilities.
    Tail,
    /// Fit of ln(−ln p) against ln(E − E0).
    LifshitzFit,
    /// Certification suites of the eigenvalue and concentration bounds.
    BoundsCheck,
    /// Spectral-bottom identification.
    E0,
    /// Rayleigh-quotient lower-bound witnesses.
    LowerBound,
    /// Off-diagonal resolvent decay.
    CtDecay,
    /// Initial-scale resolvent event frequency.
    Ilse,
}

impl Command {
    fn kind(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Ids => "ids",
            Command::Tail => "tail",
            Command::LifshitzFit => "lifshitz-fit",
            Command::BoundsCheck => "bounds-check",
            Command::E0 => "e0",
            Command::LowerBound => "lower-bound",
            Command::CtDecay => "ct-decay",
            Command::Ilse => "ilse",
        }
    }
}

const MINIMAL_MODEL: &str = r#"
[model.geometry]
dimension = 1

[model.single_site]
type = "standard-breather"
coupling = 1.0
base = { shape = "half-cell" }

[[model.laws]]
law = "uniform"
"#;

fn run(cli: &Cli) -> Result<bool, Error> {
    let kind = cli.command.kind();
    let text = match &cli.global.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None if kind == "bounds-check" => MINIMAL_MODEL.to_string(),
        None => return Err(Error::Config(format!("`{kind}` needs --config <path>"))),
    };
    let ov = Overrides {
        kind: Some(kind.to_string()),
        seed: cli.global.seed,
        samples: cli.global.samples,
        jobs: cli.global.jobs,
        out: cli.global.out.clone(),
    };
    let cfg = parse_with_overrides(&text, &ov)?;
    let (record, written) = run_experiment(&cfg)?;
    eprintln!(
        "{kind}: {} rows in {:.2} s -> {} , {}",
        record.table.rows.len(),
        record.wall_time_s,
        written.record.display(),
        written.table.display()
    );
    for c in &record.certifications {
        eprintln!(
            "  {:<24} {} ({} checked, {} failures, worst margin {:.3e})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.checked,
            c.failures,
            c.worst_margin
        );
    }
    Ok(record.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
