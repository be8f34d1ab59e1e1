use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybridcv_cli::config::{Experiment, Format, Model, Overrides, SweepConfig, WignerOptions, WignerState};
use hybridcv_cli::presets::{preset, PRESETS};
use hybridcv_cli::{run, write_file, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "hybridcv", version, about = "Hybrid DV/CV teleportation and self-Kerr sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a preset, a config file, or both (file overrides preset).
    Run {
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Wigner function of a named state on a square grid.
    Wigner {
        #[arg(long, value_enum, default_value = "scs+")]
        state: WignerState,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 3.0)]
        extent: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print (or write with --out) the effective config as TOML.
    Dump {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Add the wall-clock time to the provenance line.
    #[arg(long)]
    timestamp: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { out: self.out.clone(), format: self.format, seed: self.seed, dim: self.dim, model: self.model }
    }

    fn options(&self) -> RunOptions {
        RunOptions { jobs: self.jobs, timestamp: self.timestamp }
    }
}

fn base_config(preset_name: Option<&str>, file: Option<&PathBuf>) -> Result<SweepConfig, CliError> {
    if let Some(path) = file {
        return Ok(SweepConfig::load(path)?);
    }
    match preset_name {
        Some(name) => Ok(preset(name)?),
        None => Ok(SweepConfig::default()),
    }
}

fn execute(cfg: SweepConfig, common: &Common) -> Result<i32, CliError> {
    let mut cfg = cfg;
    cfg.apply(&common.overrides());
    let report = run(&cfg, &common.options())?;
    if let Some(p) = &report.path {
        eprintln!("wrote {} rows to {}", report.rows, p.display());
    }
    if report.flagged > 0 {
        eprintln!("{} row(s) flagged with errors", report.flagged);
    }
    Ok(report.exit_code())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { preset, common } => {
            let cfg = base_config(preset.as_deref(), common.config.as_ref())?;
            execute(cfg, &common)
        }
        Command::Wigner { state, alpha, theta, phi, extent, points, common } => {
            let mut cfg = base_config(None, common.config.as_ref())?;
            cfg.experiment = Experiment::WignerGrid;
            if common.config.is_none() {
                cfg.wigner = WignerOptions { state, alpha, theta, phi, extent, points };
            }
            execute(cfg, &common)
        }
        Command::Presets { action: PresetsAction::List } => {
            for p in PRESETS {
                println!("{:<6} {}", p.name, p.description);
            }
            Ok(0)
        }
        Command::Config { action: ConfigAction::Dump { preset, config, out } } => {
            let cfg = base_config(preset.as_deref(), config.as_ref())?;
            cfg.validate()?;
            let text = cfg.to_toml();
            match out {
                Some(p) => write_file(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
