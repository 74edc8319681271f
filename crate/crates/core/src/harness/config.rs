use serde::{Deserialize, Serialize};

use super::hash::Fnv;
use crate::bounds::CertificationSizes;
use crate::error::{Error, Result};
use crate::operators::BcKind;
use crate::potential::PotentialModel;
use crate::spectral_stats::{EnergyGrid, LowerBoundConfig, DEFAULT_ENERGY_RATIO};

fn default_n_h() -> usize {
    8
}
fn default_samples() -> usize {
    1000
}
fn default_jobs() -> usize {
    1
}
fn default_out() -> String {
    "out".into()
}
fn default_ratio() -> f64 {
    DEFAULT_ENERGY_RATIO
}
fn default_bc() -> BcKind {
    BcKind::Mezincescu
}
fn default_all_bcs() -> Vec<BcKind> {
    vec![BcKind::Dirichlet, BcKind::Mezincescu, BcKind::Neumann]
}
fn default_k() -> usize {
    10
}
fn default_one() -> usize {
    1
}
fn default_gap_levels() -> Vec<usize> {
    (2..=6).collect()
}
fn default_fractions() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}
fn default_calibration_samples() -> usize {
    50
}
fn default_radius() -> f64 {
    1.0
}
fn default_error() -> f64 {
    1e-3
}
fn default_nondegeneracy_samples() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    #[serde(default = "default_n_h")]
    pub n_h: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n_h: default_n_h() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_out")]
    pub out: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            samples: default_samples(),
            jobs: default_jobs(),
            out: default_out(),
        }
    }
}

/// Energy offsets E − E₀, either listed or geometric down from `top`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    #[serde(default)]
    pub offsets: Vec<f64>,
    pub top: Option<f64>,
    pub count: Option<usize>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

impl Energies {
    pub fn listed(offsets: Vec<f64>) -> Self {
        Energies {
            offsets,
            top: None,
            count: None,
            ratio: default_ratio(),
        }
    }

    pub fn geometric(top: f64, count: usize, ratio: f64) -> Self {
        Energies {
            offsets: Vec::new(),
            top: Some(top),
            count: Some(count),
            ratio,
        }
    }

    /// Increasing offsets.
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let grid = match (self.offsets.is_empty(), self.top, self.count) {
            (false, None, None) => {
                let mut o = self.offsets.clone();
                o.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                EnergyGrid::new(0.0, o)?
            }
            (true, Some(top), Some(count)) => EnergyGrid::geometric_down(0.0, top, count, self.ratio)?,
            _ => {
                return Err(Error::Config(
                    "energies: give either `offsets` or both `top` and `count`".into(),
                ))
            }
        };
        Ok(grid.offsets)
    }

    fn validate(&self, path: &str, e: &mut Vec<String>) {
        if let Err(err) = self.resolve() {
            e.push(format!("{path}: {}", strip(&err)));
        }
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::Config(m) | Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    #[serde(default = "default_bc")]
    pub bc: BcKind,
    pub energies: Energies,
    /// Empirical gap constant; estimated over `gap_levels` when absent.
    pub cgap: Option<f64>,
    #[serde(default = "default_gap_levels")]
    pub gap_levels: Vec<usize>,
    /// Non-degeneracy level; searched for when absent.
    pub mu: Option<f64>,
    /// Lower bound on the X_k means; Ψ₋²μ² when absent.
    pub beta: Option<f64>,
    /// Replaces Cgap·β/8.
    pub delta: Option<f64>,
    #[serde(default = "default_nondegeneracy_samples")]
    pub nondegeneracy_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum {
        level: usize,
        #[serde(default = "default_bc")]
        bc: BcKind,
        #[serde(default = "default_k")]
        k: usize,
    },
    Ids {
        level: usize,
        #[serde(default = "default_all_bcs")]
        bcs: Vec<BcKind>,
        energies: Energies,
        /// Count with the k lowest eigenvalues instead of matrix inertia.
        k: Option<usize>,
    },
    Tail(TailParams),
    LifshitzFit {
        /// (E − E₀, value) pairs to fit directly.
        #[serde(default)]
        points: Vec<[f64; 2]>,
        /// Otherwise a tail campaign whose p̂ are fitted.
        tail: Option<TailParams>,
    },
    BoundsCheck {
        #[serde(default)]
        sizes: CertificationSizes,
    },
    E0 {
        levels: Vec<usize>,
        alphas: Vec<f64>,
        cperp: Option<f64>,
    },
    LowerBound {
        level: usize,
        energies: Energies,
        #[serde(default)]
        decay: LowerBoundConfig,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_error")]
        error: f64,
    },
    CtDecay {
        level: usize,
        /// Energies f·E₁.
        #[serde(default)]
        fractions: Vec<f64>,
        /// Energies E₁ − g.
        #[serde(default)]
        gaps: Vec<f64>,
        max_shell: Option<usize>,
        #[serde(default = "default_one")]
        realizations: usize,
    },
    Ilse {
        ell: usize,
        kappa: u32,
        c1: Option<f64>,
        c2: Option<f64>,
        c_prime: Option<f64>,
        #[serde(default = "default_calibration_samples")]
        calibration_samples: usize,
        #[serde(default = "default_fractions")]
        fractions: Vec<f64>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Spectrum { .. } => "spectrum",
            Experiment::Ids { .. } => "ids",
            Experiment::Tail(_) => "tail",
            Experiment::LifshitzFit { .. } => "lifshitz-fit",
            Experiment::BoundsCheck { .. } => "bounds-check",
            Experiment::E0 { .. } => "e0",
            Experiment::LowerBound { .. } => "lower-bound",
            Experiment::CtDecay { .. } => "ct-decay",
            Experiment::Ilse { .. } => "ilse",
        }
    }

    fn validate(&self, e: &mut Vec<String>) {
        let p = "experiment";
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self {
            Experiment::Spectrum { k, .. } => {
                if *k == 0 {
                    e.push(format!("{p}.k: must be >= 1"));
                }
            }
            Experiment::Ids { bcs, energies, k, .. } => {
                if bcs.is_empty() {
                    e.push(format!("{p}.bcs: need at least one boundary condition"));
                }
                energies.validate(&format!("{p}.energies"), e);
                if *k == Some(0) {
                    e.push(format!("{p}.k: must be >= 1"));
                }
            }
            Experiment::Tail(t) => t.validate(p, e),
            Experiment::LifshitzFit { points, tail } => {
                match (points.is_empty(), tail) {
                    (true, None) => e.push(format!("{p}: give `points` or a `tail` table")),
                    (false, Some(_)) => e.push(format!("{p}: give only one of `points` and `tail`")),
                    _ => {}
                }
                for (i, [x, v]) in points.iter().enumerate() {
                    if !(*x > 0.0) || !(*v > 0.0 && *v < 1.0) {
                        e.push(format!("{p}.points[{i}]: need offset in (0, inf) and value in (0, 1), got [{x}, {v}]"));
                    }
                }
                if let Some(t) = tail {
                    t.validate(&format!("{p}.tail"), e);
                }
            }
            Experiment::BoundsCheck { sizes } => {
                if sizes.chernoff_runs == 0 {
                    e.push(format!("{p}.sizes.chernoff_runs: must be >= 1"));
                }
            }
            Experiment::E0 { levels, alphas, cperp } => {
                if levels.is_empty() || levels.contains(&0) {
                    e.push(format!("{p}.levels: need levels >= 1"));
                }
                if alphas.is_empty() || alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    e.push(format!("{p}.alphas: need values in [0, 1]"));
                }
                if cperp.is_some_and(|c| !(c >= 0.0)) {
                    e.push(format!("{p}.cperp: must be in [0, inf)"));
                }
            }
            Experiment::LowerBound { level, energies, decay, radius, error } => {
                if *level == 0 {
                    e.push(format!("{p}.level: must be >= 1"));
                }
                energies.validate(&format!("{p}.energies"), e);
                e.extend(decay.validate().into_iter().map(|m| format!("{p}.decay.{m}")));
                if !positive(*radius) {
                    e.push(format!("{p}.radius: must be in (0, inf), got {radius}"));
                }
                if !positive(*error) {
                    e.push(format!("{p}.error: must be in (0, inf), got {error}"));
                }
            }
            Experiment::CtDecay { fractions, gaps, realizations, .. } => {
                if fractions.is_empty() && gaps.is_empty() {
                    e.push(format!("{p}: give `fractions` or `gaps`"));
                }
                if fractions.iter().any(|f| !(*f < 1.0)) {
                    e.push(format!("{p}.fractions: each must be below 1"));
                }
                if gaps.iter().any(|g| !positive(*g)) {
                    e.push(format!("{p}.gaps: each must be in (0, inf)"));
                }
                if *realizations == 0 {
                    e.push(format!("{p}.realizations: must be >= 1"));
                }
            }
            Experiment::Ilse { ell, kappa, c1, c2, c_prime, calibration_samples, fractions } => {
                if *ell == 0 || *kappa == 0 {
                    e.push(format!("{p}.ell/kappa: must be >= 1"));
                }
                for (name, v) in [("c1", c1), ("c2", c2), ("c_prime", c_prime)] {
                    if v.is_some_and(|x| !positive(x)) {
                        e.push(format!("{p}.{name}: must be in (0, inf)"));
                    }
                }
                if *calibration_samples == 0 {
                    e.push(format!("{p}.calibration_samples: must be >= 1"));
                }
                if fractions.is_empty() || fractions.iter().any(|f| !positive(*f)) {
                    e.push(format!("{p}.fractions: need values in (0, inf)"));
                }
            }
        }
    }
}

impl TailParams {
    fn validate(&self, p: &str, e: &mut Vec<String>) {
        self.energies.validate(&format!("{p}.energies"), e);
        for (name, v, hi) in [("cgap", self.cgap, f64::INFINITY), ("mu", self.mu, f64::INFINITY), ("beta", self.beta, 1.0), ("delta", self.delta, f64::INFINITY)] {
            if let Some(x) = v {
                if !(x > 0.0 && x <= hi) {
                    e.push(format!("{p}.{name}: must be in (0, {hi}], got {x}"));
                }
            }
        }
        if self.cgap.is_none() && (self.gap_levels.is_empty() || self.gap_levels.contains(&0)) {
            e.push(format!("{p}.gap_levels: need levels >= 1"));
        }
        if self.nondegeneracy_samples == 0 {
            e.push(format!("{p}.nondegeneracy_samples: must be >= 1"));
        }
    }
}

/// A complete experiment: model, discretization, kind and campaign settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: PotentialModel,
    #[serde(default)]
    pub grid: GridSection,
    pub experiment: Experiment,
    #[serde(default)]
    pub run: RunSection,
}

impl ExperimentConfig {
    /// Every range violation, with the path of the offending field.
    pub fn validate(&self) -> Vec<String> {
        let mut e: Vec<String> = self.model.validate().into_iter().map(|m| format!("model.{m}")).collect();
        if self.grid.n_h < 2 {
            e.push(format!("grid.n_h: must be >= 2, got {}", self.grid.n_h));
        }
        if self.run.samples == 0 {
            e.push("run.samples: must be >= 1".into());
        }
        if self.run.jobs == 0 {
            e.push("run.jobs: must be >= 1".into());
        }
        self.experiment.validate(&mut e);
        e
    }

    /// FNV-1a of the canonical JSON of everything that determines the
    /// results (model, grid, experiment, seed, samples).
    pub fn hash(&self) -> u64 {
        #[derive(Serialize)]
        struct Key<'a> {
            model: &'a PotentialModel,
            grid: &'a GridSection,
            experiment: &'a Experiment,
            seed: u64,
            samples: usize,
        }
        let key = Key {
            model: &self.model,
            grid: &self.grid,
            experiment: &self.experiment,
            seed: self.run.seed,
            samples: self.run.samples,
        };
        let mut h = Fnv::new();
        h.write(serde_json::to_string(&key).expect("config is serializable").as_bytes());
        h.finish()
    }

    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }
}

/// Keys present in `raw` but absent from `known`, as dotted paths.
fn unknown_keys(raw: &toml::Value, known: &toml::Value, path: &str, out: &mut Vec<String>) {
    match (raw, known) {
        (toml::Value::Table(r), toml::Value::Table(k)) => {
            for (key, v) in r {
                let p = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                match k.get(key) {
                    Some(kv) => unknown_keys(v, kv, &p, out),
                    // the identity generator is omitted when serializing
                    None if key == "generator" && path.ends_with("geometry") => {}
                    None => out.push(p),
                }
            }
        }
        (toml::Value::Array(r), toml::Value::Array(k)) => {
            for (i, (rv, kv)) in r.iter().zip(k).enumerate() {
                unknown_keys(rv, kv, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// Parse and validate a config, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| Error::Schema(vec![format!("syntax: {}", e.message())]))?;
    parse_value(raw)
}

/// Like [`parse_config`] on an already parsed document.
pub fn parse_value(raw: toml::Value) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = raw
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::Schema(vec![e.message().trim().to_string()]))?;
    let known = toml::Value::try_from(&cfg).map_err(|e| Error::Config(format!("cannot re-serialize config: {e}")))?;
    let mut errors = Vec::new();
    let mut unknown = Vec::new();
    unknown_keys(&raw, &known, "", &mut unknown);
    errors.extend(unknown.into_iter().map(|k| format!("{k}: unknown key")));
    errors.extend(cfg.validate());
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Schema(errors))
    }
}
