//! Named configurations for the figure reproductions.

use std::f64::consts::PI;

use crate::config::{ConfigError, CouplingMode, Experiment, Grid, KerrOptions, SweepConfig};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> SweepConfig,
}

impl Preset {
    pub fn config(&self) -> SweepConfig {
        (self.build)()
    }
}

fn theta_grid() -> Grid {
    Grid::Range { start: 0.0, stop: PI, step: PI / 64.0 }
}

fn fig2() -> SweepConfig {
    SweepConfig {
        experiment: Experiment::TeleportFidelity,
        theta: theta_grid(),
        phi: Grid::single(0.0),
        alpha: Grid::Range { start: 0.05, stop: 3.0, step: 0.05 },
        ..Default::default()
    }
}

fn fig2b() -> SweepConfig {
    SweepConfig { alpha: Grid::single(2.0), ..fig2() }
}

fn fig4() -> SweepConfig {
    SweepConfig {
        experiment: Experiment::KerrSweep,
        flux: Grid::Range { start: 0.10, stop: 0.20, step: 0.005 },
        kerr: KerrOptions { couplings: CouplingMode::Derived, ..Default::default() },
        ..Default::default()
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2",
        description:
            "teleportation fidelities over theta in [0, pi] (65 points) and alpha in [0.05, 3] (step 0.05), phi = 0",
        build: fig2,
    },
    Preset { name: "fig2b", description: "theta cut of fig2 at alpha = 2", build: fig2b },
    Preset {
        name: "fig4",
        description: "self-Kerr K against fluxonium external flux 0.10..0.20 (step 0.005), derived couplings",
        build: fig4,
    },
];

pub fn preset(name: &str) -> Result<SweepConfig, ConfigError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(Preset::config)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in PRESETS {
            p.config().validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn fig2_grid_contains_alpha_two_and_three() {
        let r = preset("fig2").unwrap().validate().unwrap();
        assert_eq!(r.theta.len(), 65);
        assert_eq!(r.alpha.len(), 60);
        assert!(r.alpha.iter().any(|a| (a - 2.0).abs() < 1e-12));
        assert_eq!(*r.alpha.last().unwrap(), 3.0);
    }

    #[test]
    fn fig4_grid() {
        let r = preset("fig4").unwrap().validate().unwrap();
        assert_eq!(r.flux.len(), 21);
        assert!(r.flux.iter().any(|f| (f - 0.141).abs() < 0.003));
    }
}
