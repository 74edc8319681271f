use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::bounds::SuiteReport;
use crate::error::{Error, Result};

pub const RECORD_FORMAT: &str = "breather-lab/experiment-record";
pub const RECORD_VERSION: u32 = 1;

/// One flat-table entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    /// Non-finite values become text so that JSON stays lossless.
    pub fn float(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Float(v)
        } else if v.is_nan() {
            Cell::Text("nan".into())
        } else if v > 0.0 {
            Cell::Text("inf".into())
        } else {
            Cell::Text("-inf".into())
        }
    }

    pub fn opt_float(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::float)
    }

    pub fn int(v: impl TryInto<i64>) -> Cell {
        v.try_into().map_or(Cell::Empty, Cell::Int)
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Comma-separated, header first, floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Self-describing result of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub samples: usize,
    pub jobs: usize,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub results: serde_json::Value,
    pub table: Table,
    pub certifications: Vec<SuiteReport>,
    pub pass: bool,
}

impl ExperimentRecord {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!("cannot serialize record: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: ExperimentRecord = serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed record: {e}")))?;
        if r.format != RECORD_FORMAT {
            return Err(Error::Config(format!("not an experiment record: format = {:?}", r.format)));
        }
        if r.version > RECORD_VERSION {
            return Err(Error::Config(format!("record version {} is newer than {RECORD_VERSION}", r.version)));
        }
        Ok(r)
    }
}

/// Paths of the files written for one record.
#[derive(Clone, Debug, PartialEq)]
pub struct WrittenRecord {
    pub record: PathBuf,
    pub table: PathBuf,
}

fn create_new(path: &Path, contents: &str) -> std::io::Result<bool> {
    match OpenOptions::new().write(true).create_new(true).open(path) {
        Ok(mut f) => {
            f.write_all(contents.as_bytes())?;
            Ok(true)
        }
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Ok(false),
        Err(e) => Err(e),
    }
}

/// Write `<kind>-<hash>.json` and `.csv` into `dir`, never replacing an
/// existing file: taken names get a `-1`, `-2`, ... suffix.
pub fn write_record(record: &ExperimentRecord, dir: &Path) -> Result<WrittenRecord> {
    std::fs::create_dir_all(dir)?;
    let json = record.to_json()?;
    let csv = record.table.to_csv();
    let stem = format!("{}-{}", record.kind, record.config_hash);
    for n in 0usize.. {
        let name = if n == 0 { stem.clone() } else { format!("{stem}-{n}") };
        let rec = dir.join(format!("{name}.json"));
        let tab = dir.join(format!("{name}.csv"));
        if tab.exists() {
            continue;
        }
        if !create_new(&rec, &json)? {
            continue;
        }
        if !create_new(&tab, &csv)? {
            std::fs::remove_file(&rec)?;
            continue;
        }
        return Ok(WrittenRecord { record: rec, table: tab });
    }
    unreachable!("unbounded suffix search")
}
