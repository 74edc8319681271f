//! Reproducible experiments: TOML configs, campaign execution, versioned
//! JSON records and flat CSV tables.
//!
//! A run is fully determined by its config and master seed. The worker
//! count (`jobs`) and the output directory are excluded from the config
//! hash and never change any number in the outputs.

mod config;
mod hash;
mod record;
mod run;

use std::path::PathBuf;

pub use config::{parse_config, parse_value, Energies, Experiment, ExperimentConfig, GridSection, RunSection, TailParams};
pub use hash::{fnv1a, Fnv};
pub use record::{write_record, Cell, ExperimentRecord, Table, WrittenRecord, RECORD_FORMAT, RECORD_VERSION};
pub use run::{execute, run_experiment, table_columns};

use crate::error::{Error, Result};

pub const KINDS: [&str; 9] = [
    "spectrum",
    "ids",
    "tail",
    "lifshitz-fit",
    "bounds-check",
    "e0",
    "lower-bound",
    "ct-decay",
    "ilse",
];

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub kind: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Parse `text` after applying `ov`. The subcommand supplies
/// `experiment.kind` when the file leaves it out and must agree otherwise.
pub fn parse_with_overrides(text: &str, ov: &Overrides) -> Result<ExperimentConfig> {
    let mut raw: toml::Value =
        toml::from_str(text).map_err(|e| Error::Schema(vec![format!("syntax: {}", e.message())]))?;
    let root = raw
        .as_table_mut()
        .ok_or_else(|| Error::Schema(vec!["top level must be a table".into()]))?;
    if let Some(kind) = &ov.kind {
        let exp = root
            .entry("experiment")
            .or_insert_with(|| toml::Value::Table(Default::default()));
        let exp = exp
            .as_table_mut()
            .ok_or_else(|| Error::Schema(vec!["experiment: must be a table".into()]))?;
        match exp.get("kind").and_then(|k| k.as_str()) {
            Some(k) if k != kind => {
                return Err(Error::Config(format!(
                    "subcommand `{kind}` does not match experiment.kind = \"{k}\""
                )))
            }
            _ => {
                exp.insert("kind".into(), toml::Value::String(kind.clone()));
            }
        }
    }
    let run = root
        .entry("run")
        .or_insert_with(|| toml::Value::Table(Default::default()))
        .as_table_mut()
        .ok_or_else(|| Error::Schema(vec!["run: must be a table".into()]))?;
    if let Some(s) = ov.seed {
        let s = i64::try_from(s).map_err(|_| Error::Config(format!("seed {s} exceeds the TOML integer range")))?;
        run.insert("seed".into(), toml::Value::Integer(s));
    }
    if let Some(n) = ov.samples {
        run.insert("samples".into(), toml::Value::Integer(n as i64));
    }
    if let Some(j) = ov.jobs {
        run.insert("jobs".into(), toml::Value::Integer(j as i64));
    }
    if let Some(o) = &ov.out {
        run.insert("out".into(), toml::Value::String(o.to_string_lossy().into_owned()));
    }
    parse_value(raw)
}
