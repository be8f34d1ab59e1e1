//! Sweep runner behind the `hybridcv` binary.

pub mod config;
pub mod experiments;
pub mod output;
pub mod presets;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ConfigError, Experiment, Format, Overrides, SweepConfig};

/// Directory that relative output paths are resolved against.
pub const OUTPUT_DIR_ENV: &str = "HYBRIDCV_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Compute(#[from] hybridcv::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io { .. } | CliError::Pool(_) => 1,
        }
    }
}

/// Exit code when the file was written but some rows carry an error flag.
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every processor.
    pub jobs: Option<usize>,
    pub timestamp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub bytes: Vec<u8>,
    pub rows: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// `None` when written to stdout.
    pub path: Option<PathBuf>,
    pub rows: usize,
    pub flagged: usize,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.flagged > 0 {
            EXIT_PARTIAL
        } else {
            0
        }
    }
}

pub fn provenance(cfg: &SweepConfig, timestamp: bool) -> String {
    let mut line = format!(
        "hybridcv-cli {} hybridcv {} experiment={} config_sha256={}",
        env!("CARGO_PKG_VERSION"),
        hybridcv::VERSION,
        cfg.experiment.name(),
        cfg.hash()
    );
    if timestamp {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        line.push_str(&format!(" unix_time={secs}"));
    }
    line
}

/// Validates, computes and serializes one run without touching the
/// filesystem.
pub fn render(cfg: &SweepConfig, opts: &RunOptions) -> Result<Rendered, CliError> {
    let grid = cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        if j == 0 {
            return Err(ConfigError::invalid("jobs", "must be at least 1").into());
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let rows = pool.install(|| experiments::run_rows(cfg, &grid))?;
    let columns = experiments::columns(cfg.experiment);
    let mut bytes = Vec::new();
    match cfg.output_format {
        Format::Csv => output::write_csv(&mut bytes, &provenance(cfg, opts.timestamp), columns, &rows),
        Format::Json => output::write_json(&mut bytes, columns, &rows),
    }
    .expect("writing to memory");
    let flagged = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(Rendered { bytes, rows: rows.len(), flagged })
}

/// Output location: the configured path (or `<experiment>.<ext>`), placed
/// under `HYBRIDCV_OUTPUT_DIR` when that is set and the path is relative.
/// `-` means stdout.
pub fn output_path(cfg: &SweepConfig, out_dir: Option<&Path>) -> Option<PathBuf> {
    let path = cfg
        .output_path
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", cfg.experiment.name(), cfg.output_format.extension())));
    if path.as_os_str() == "-" {
        return None;
    }
    match out_dir {
        Some(dir) if path.is_relative() => Some(dir.join(path)),
        _ => Some(path),
    }
}

pub fn env_output_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Full run. Nothing is written unless the config validates and the
/// computation completes.
pub fn run(cfg: &SweepConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    run_in(cfg, opts, env_output_dir().as_deref())
}

pub fn run_in(cfg: &SweepConfig, opts: &RunOptions, out_dir: Option<&Path>) -> Result<RunReport, CliError> {
    let rendered = render(cfg, opts)?;
    let path = output_path(cfg, out_dir);
    match &path {
        Some(p) => write_file(p, &rendered.bytes)?,
        None => {
            std::io::stdout().write_all(&rendered.bytes).map_err(|source| CliError::Io { path: "-".into(), source })?
        }
    }
    Ok(RunReport { path, rows: rendered.rows, flagged: rendered.flagged })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}
