//! Sweep configuration: TOML schema, flag overrides and validation.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hybridcv::fock::required_dim;
use hybridcv::kerr::Chain;
use hybridcv::teleport::MeasurementModel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Largest |alpha| accepted by the CLI.
pub const MAX_ALPHA: f64 = 6.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl ConfigError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid { field: field.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    TeleportFidelity,
    BsmStats,
    VerifyEcs,
    PauliX,
    KerrSweep,
    WignerGrid,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::TeleportFidelity => "teleport-fidelity",
            Experiment::BsmStats => "bsm-stats",
            Experiment::VerifyEcs => "verify-ecs",
            Experiment::PauliX => "pauli-x",
            Experiment::KerrSweep => "kerr-sweep",
            Experiment::WignerGrid => "wigner-grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    #[default]
    Ideal,
    Displaced,
}

impl From<Model> for MeasurementModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Ideal => MeasurementModel::ProjectiveIdeal,
            Model::Displaced => MeasurementModel::DisplacedVacuum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Either an explicit list or an inclusive `start..=stop` range by `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn single(v: f64) -> Self {
        Grid::Values(vec![v])
    }

    pub fn points(&self, field: &str) -> Result<Vec<f64>, ConfigError> {
        match self {
            Grid::Values(v) => Ok(v.clone()),
            Grid::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err(ConfigError::invalid(field, "range bounds must be finite"));
                }
                if *step <= 0.0 {
                    return Err(ConfigError::invalid(field, format!("step {step} must be positive")));
                }
                if stop < start {
                    return Ok(Vec::new());
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..n)
                    .map(|k| {
                        let v = start + k as f64 * step;
                        if (v - stop).abs() < 1e-9 * step {
                            *stop
                        } else {
                            v.min(*stop)
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// Quoted constant lambda values.
    Explicit,
    /// `lambda_jk = g |n_jk|`, with `g` fixed by the quoted lambda_01 at flux 0.141.
    #[default]
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KerrOptions {
    pub couplings: CouplingMode,
    pub chain: Chain,
    pub cavity_freq: f64,
    pub n_photon_max: usize,
}

impl Default for KerrOptions {
    fn default() -> Self {
        Self { couplings: CouplingMode::Derived, chain: Chain::Both, cavity_freq: 9.2, n_photon_max: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum WignerState {
    #[serde(rename = "scs+")]
    #[value(name = "scs+")]
    ScsPlus,
    #[serde(rename = "scs-")]
    #[value(name = "scs-")]
    ScsMinus,
    #[serde(rename = "vacuum")]
    #[value(name = "vacuum")]
    Vacuum,
    #[serde(rename = "mixture")]
    #[value(name = "mixture")]
    Mixture,
    #[serde(rename = "ecs-conditional")]
    #[value(name = "ecs-conditional")]
    EcsConditional,
    #[serde(rename = "teleport-output")]
    #[value(name = "teleport-output")]
    TeleportOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerOptions {
    pub state: WignerState,
    pub alpha: f64,
    /// Input qubit for `teleport-output`.
    pub theta: f64,
    pub phi: f64,
    /// Grid covers `[-extent, extent]` on both axes.
    pub extent: f64,
    pub points: usize,
}

impl Default for WignerOptions {
    fn default() -> Self {
        Self { state: WignerState::ScsPlus, alpha: 2.0, theta: 0.5 * PI, phi: 0.0, extent: 3.0, points: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub theta: Grid,
    pub phi: Grid,
    pub alpha: Grid,
    pub flux: Grid,
    pub fock_dim: usize,
    pub measurement_model: Model,
    pub seed: u64,
    /// Monte-Carlo runs per point (`pauli-x`).
    pub trials: usize,
    pub max_rounds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    pub output_format: Format,
    pub kerr: KerrOptions,
    pub wigner: WignerOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::TeleportFidelity,
            theta: Grid::single(0.5 * PI),
            phi: Grid::single(0.0),
            alpha: Grid::single(2.0),
            flux: Grid::single(0.141),
            fock_dim: 40,
            measurement_model: Model::Ideal,
            seed: 0,
            trials: 2000,
            max_rounds: 64,
            output_path: None,
            output_format: Format::Csv,
            kerr: KerrOptions::default(),
            wigner: WignerOptions::default(),
        }
    }
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub model: Option<Model>,
}

/// Validated grids, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub flux: Vec<f64>,
}

impl SweepConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.out {
            self.output_path = Some(p.clone());
        }
        if let Some(f) = o.format {
            self.output_format = f;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = o.dim {
            self.fock_dim = d;
        }
        if let Some(m) = o.model {
            self.measurement_model = m;
        }
    }

    /// Hash of everything that determines the data rows. Output location,
    /// format and worker count are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_path = None;
        c.output_format = Format::Csv;
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<Resolved, ConfigError> {
        let e = self.experiment;
        let uses_qubit = matches!(e, Experiment::TeleportFidelity | Experiment::BsmStats);
        let uses_alpha = !matches!(e, Experiment::KerrSweep | Experiment::WignerGrid);
        let uses_dim = !matches!(e, Experiment::TeleportFidelity | Experiment::KerrSweep);

        let mut r = Resolved { theta: vec![], phi: vec![], alpha: vec![], flux: vec![] };
        if uses_qubit {
            r.theta = nonempty("theta", self.theta.points("theta")?)?;
            within("theta", &r.theta, |t| (0.0..=PI).contains(&t), "[0, pi]")?;
            r.phi = nonempty("phi", self.phi.points("phi")?)?;
            within("phi", &r.phi, |p| (0.0..2.0 * PI).contains(&p), "[0, 2 pi)")?;
        }
        if uses_alpha {
            r.alpha = nonempty("alpha", self.alpha.points("alpha")?)?;
            within("alpha", &r.alpha, |a| a > 0.0 && a <= MAX_ALPHA, "(0, 6]")?;
        }
        if e == Experiment::KerrSweep {
            r.flux = nonempty("flux", self.flux.points("flux")?)?;
            within("flux", &r.flux, |f| (-1.0..=1.0).contains(&f), "[-1, 1]")?;
            if self.kerr.n_photon_max < 4 {
                return Err(ConfigError::invalid("kerr.n_photon_max", "must be at least 4"));
            }
            if !(self.kerr.cavity_freq.is_finite() && self.kerr.cavity_freq > 0.0) {
                return Err(ConfigError::invalid("kerr.cavity_freq", "must be positive"));
            }
        }
        if e == Experiment::WignerGrid {
            let w = &self.wigner;
            if w.points == 0 {
                return Err(ConfigError::invalid("wigner.points", "grid is empty"));
            }
            if !(w.extent.is_finite() && w.extent > 0.0) {
                return Err(ConfigError::invalid("wigner.extent", "must be positive"));
            }
            if !(w.alpha >= 0.0 && w.alpha <= MAX_ALPHA) {
                return Err(ConfigError::invalid("wigner.alpha", "outside [0, 6]"));
            }
            if !(0.0..=PI).contains(&w.theta) {
                return Err(ConfigError::invalid("wigner.theta", "outside [0, pi]"));
            }
            if !(0.0..2.0 * PI).contains(&w.phi) {
                return Err(ConfigError::invalid("wigner.phi", "outside [0, 2 pi)"));
            }
            r.alpha = vec![w.alpha];
        }
        if e == Experiment::PauliX {
            if self.trials == 0 {
                return Err(ConfigError::invalid("trials", "must be at least 1"));
            }
            if self.max_rounds == 0 {
                return Err(ConfigError::invalid("max_rounds", "must be at least 1"));
            }
        }
        if uses_dim {
            let max_alpha = r.alpha.iter().fold(0.0_f64, |m, a| m.max(*a));
            let need = required_dim(max_alpha);
            if self.fock_dim < need {
                return Err(ConfigError::invalid(
                    "fock_dim",
                    format!("{} too small for alpha = {max_alpha}: need at least {need}", self.fock_dim),
                ));
            }
        }
        Ok(r)
    }
}

fn nonempty(field: &str, v: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
    if v.is_empty() {
        return Err(ConfigError::invalid(field, "grid is empty"));
    }
    Ok(v)
}

fn within(field: &str, v: &[f64], ok: impl Fn(f64) -> bool, range: &str) -> Result<(), ConfigError> {
    match v.iter().find(|x| !x.is_finite() || !ok(**x)) {
        Some(x) => Err(ConfigError::invalid(field, format!("value {x} outside {range}"))),
        None => Ok(()),
    }
}
