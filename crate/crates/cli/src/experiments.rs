//! Per-experiment row producers. Each grid point yields its rows
//! independently; a failing point becomes a flagged row.

use std::f64::consts::SQRT_2;

use hybridcv::fock::{coherent_state, CoherentAmplitude, DensityOperator, StateVector, WignerEvaluator, C64};
use hybridcv::gadgets::{self, verify};
use hybridcv::kerr::{
    assemble_hamiltonian, extract_kerr, fluxonium_spectrum, transmon_spectrum, Calibration, Chain, CouplingSet,
    FluxoniumParams, KerrResult, QubitSpectrum, TransmonParams,
};
use hybridcv::states::{ecs, scs, CatParity, EcsKind};
use hybridcv::teleport::{
    bsm_circuit, classical_channel, measure, prepare_total, CavitySign, FidelityReport, MeasurementModel, QubitOutcome,
    UnknownQubit,
};
use hybridcv::Error;
use rayon::prelude::*;

use crate::config::{CouplingMode, Experiment, Resolved, SweepConfig, WignerOptions, WignerState};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Values for every column except the trailing `error`.
    pub cells: Vec<Cell>,
    pub error: Option<String>,
}

impl Row {
    fn ok(cells: Vec<Cell>) -> Self {
        let bad = cells.iter().any(|c| matches!(c, Cell::Num(x) if !x.is_finite()));
        if bad {
            return Row { cells: blank_numbers(cells), error: Some("non-finite value".into()) };
        }
        Row { cells, error: None }
    }

    /// Keeps the grid coordinates and blanks the rest.
    fn failed(keys: Vec<Cell>, width: usize, err: impl ToString) -> Self {
        let mut cells = keys;
        cells.resize(width, Cell::Empty);
        Row { cells, error: Some(err.to_string()) }
    }
}

fn blank_numbers(cells: Vec<Cell>) -> Vec<Cell> {
    cells.into_iter().map(|c| if matches!(c, Cell::Num(x) if !x.is_finite()) { Cell::Empty } else { c }).collect()
}

pub fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::TeleportFidelity => {
            &["theta", "phi", "alpha", "f_quantum", "f_classical", "f_dv_classical", "error"]
        }
        Experiment::BsmStats => {
            &["theta", "phi", "alpha", "p_g_plus", "p_g_minus", "p_e_plus", "p_e_minus", "p_total", "error"]
        }
        Experiment::VerifyEcs => {
            &["alpha", "state", "zz_correlation", "parity_correlation", "fringe_wigner_origin", "verdict", "error"]
        }
        Experiment::PauliX => &["alpha", "trials", "success_probability", "mean_rounds", "error"],
        Experiment::KerrSweep => &[
            "flux",
            "k_khz",
            "omega_tilde",
            "e0",
            "e1",
            "e2",
            "lambda_f01",
            "lambda_f12",
            "lambda_f02",
            "lambda_t01",
            "lambda_t12",
            "error",
        ],
        Experiment::WignerGrid => &["ix", "iy", "re_beta", "im_beta", "w", "error"],
    }
}

fn width(e: Experiment) -> usize {
    columns(e).len() - 1
}

/// Rows of one run, in grid order.
pub fn run_rows(cfg: &SweepConfig, grid: &Resolved) -> Result<Vec<Row>, Error> {
    let rows = match cfg.experiment {
        Experiment::TeleportFidelity => {
            qubit_grid(grid).into_par_iter().map(|(t, p, a)| teleport_row(t, p, a)).collect()
        }
        Experiment::BsmStats => {
            let model = cfg.measurement_model.into();
            qubit_grid(grid).into_par_iter().map(|(t, p, a)| bsm_row(t, p, a, cfg.fock_dim, model)).collect()
        }
        Experiment::VerifyEcs => {
            let model = cfg.measurement_model.into();
            let per: Vec<Vec<Row>> = grid.alpha.par_iter().map(|&a| verify_rows(a, cfg.fock_dim, model)).collect();
            per.into_iter().flatten().collect()
        }
        Experiment::PauliX => grid.alpha.iter().map(|&a| pauli_row(a, cfg)).collect(),
        Experiment::KerrSweep => kerr_rows(cfg, &grid.flux)?,
        Experiment::WignerGrid => wigner_rows(&cfg.wigner, cfg.fock_dim, cfg.measurement_model.into()),
    };
    Ok(rows)
}

fn qubit_grid(g: &Resolved) -> Vec<(f64, f64, f64)> {
    let mut v = Vec::with_capacity(g.theta.len() * g.phi.len() * g.alpha.len());
    for &t in &g.theta {
        for &p in &g.phi {
            for &a in &g.alpha {
                v.push((t, p, a));
            }
        }
    }
    v
}

fn teleport_row(theta: f64, phi: f64, alpha: f64) -> Row {
    let r = FidelityReport::compute(theta, phi, alpha);
    Row::ok(vec![
        Cell::Num(theta),
        Cell::Num(phi),
        Cell::Num(alpha),
        Cell::Num(r.f_quantum),
        Cell::Num(r.f_classical),
        Cell::Num(r.f_dv_classical),
    ])
}

fn bsm_row(theta: f64, phi: f64, alpha: f64, dim: usize, model: MeasurementModel) -> Row {
    let keys = vec![Cell::Num(theta), Cell::Num(phi), Cell::Num(alpha)];
    let record = UnknownQubit::new(theta, phi)
        .and_then(|q| prepare_total(&q, CoherentAmplitude::real(alpha), dim))
        .and_then(|s| bsm_circuit(&s))
        .and_then(|s| measure(&s, model, CoherentAmplitude::real(alpha)));
    match record {
        Ok(rec) => {
            let mut cells = keys;
            for (q, s) in [
                (QubitOutcome::G, CavitySign::Plus),
                (QubitOutcome::G, CavitySign::Minus),
                (QubitOutcome::E, CavitySign::Plus),
                (QubitOutcome::E, CavitySign::Minus),
            ] {
                cells.push(Cell::Num(rec.get(q, s).probability));
            }
            cells.push(Cell::Num(rec.total_probability()));
            Row::ok(cells)
        }
        Err(e) => Row::failed(keys, width(Experiment::BsmStats), e),
    }
}

fn verify_rows(alpha: f64, dim: usize, model: MeasurementModel) -> Vec<Row> {
    let amp = CoherentAmplitude::real(alpha);
    let states: [(&str, Result<DensityOperator, Error>); 2] = [
        ("ecs", ecs(EcsKind::PhiPlus, amp, dim).map(|s| DensityOperator::from_pure(&s))),
        ("mixture", classical_channel(amp, dim)),
    ];
    states
        .into_iter()
        .map(|(name, rho)| {
            let keys = vec![Cell::Num(alpha), Cell::Text(name.into())];
            match rho.and_then(|r| verify(&r, amp, model)) {
                Ok(rep) => {
                    let verdict = serde_json::to_value(rep.verdict)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default();
                    let mut cells = keys;
                    cells.extend([
                        Cell::Num(rep.zz_correlation),
                        Cell::Num(rep.parity_correlation),
                        Cell::Num(rep.fringe_wigner_origin),
                        Cell::Text(verdict),
                    ]);
                    Row::ok(cells)
                }
                Err(e) => Row::failed(keys, width(Experiment::VerifyEcs), e),
            }
        })
        .collect()
}

fn pauli_row(alpha: f64, cfg: &SweepConfig) -> Row {
    let amp = CoherentAmplitude::real(alpha);
    let keys = vec![Cell::Num(alpha), Cell::Int(cfg.trials as u64)];
    let out = gadgets::build_ghz(amp, cfg.fock_dim)
        .and_then(|s| gadgets::success_probability(&s))
        .and_then(|p| Ok((p, gadgets::mean_rounds(amp, cfg.fock_dim, cfg.trials, cfg.max_rounds, cfg.seed)?)));
    match out {
        Ok((p, m)) => {
            let mut cells = keys;
            cells.extend([Cell::Num(p), Cell::Num(m)]);
            Row::ok(cells)
        }
        Err(e) => Row::failed(keys, width(Experiment::PauliX), e),
    }
}

fn kerr_rows(cfg: &SweepConfig, flux: &[f64]) -> Result<Vec<Row>, Error> {
    let k = &cfg.kerr;
    let fp = FluxoniumParams::default();
    let tp = TransmonParams::default();
    let transmon = transmon_spectrum(&tp)?;
    let calibration = match k.couplings {
        CouplingMode::Derived => Some(Calibration::from_reference(&fp, &tp, &CouplingSet::reference())?),
        CouplingMode::Explicit => None,
    };
    Ok(flux
        .par_iter()
        .map(|&f| {
            let point = fluxonium_spectrum(&fp.at_flux(f)).and_then(|fs| {
                let c = match &calibration {
                    Some(cal) => cal.couplings(&fs, &transmon),
                    None => CouplingSet::reference(),
                };
                let (a, b) = match k.chain {
                    Chain::Both => (fs, transmon.clone()),
                    Chain::FluxoniumOnly => (fs, QubitSpectrum::absent()),
                    Chain::TransmonOnly => (QubitSpectrum::absent(), transmon.clone()),
                };
                let r: KerrResult = extract_kerr(&assemble_hamiltonian(&a, &b, &c, k.cavity_freq, k.n_photon_max)?)?;
                Ok((c, r))
            });
            match point {
                Ok((c, r)) => Row::ok(vec![
                    Cell::Num(f),
                    Cell::Num(r.k_khz),
                    Cell::Num(r.omega_tilde),
                    Cell::Num(r.dressed_energies[0]),
                    Cell::Num(r.dressed_energies[1]),
                    Cell::Num(r.dressed_energies[2]),
                    Cell::Num(c.fluxonium.l01),
                    Cell::Num(c.fluxonium.l12),
                    Cell::Num(c.fluxonium.l02),
                    Cell::Num(c.transmon.l01),
                    Cell::Num(c.transmon.l12),
                ]),
                Err(e) => Row::failed(vec![Cell::Num(f)], width(Experiment::KerrSweep), e),
            }
        })
        .collect())
}

/// Single-mode density operator named by the Wigner options.
pub fn wigner_state(w: &WignerOptions, dim: usize, model: MeasurementModel) -> Result<DensityOperator, Error> {
    let amp = CoherentAmplitude::real(w.alpha);
    match w.state {
        WignerState::ScsPlus => Ok(DensityOperator::from_pure(&scs(CatParity::Even, amp, dim)?)),
        WignerState::ScsMinus => Ok(DensityOperator::from_pure(&scs(CatParity::Odd, amp, dim)?)),
        WignerState::Vacuum => Ok(DensityOperator::from_pure(&StateVector::vacuum("a", dim)?)),
        WignerState::Mixture => {
            let p = coherent_state(amp, dim)?;
            let m = coherent_state(amp.neg(), dim)?;
            DensityOperator::mixture(&[(0.5, &p), (0.5, &m)])
        }
        WignerState::EcsConditional => {
            let rho = DensityOperator::from_pure(&ecs(EcsKind::PhiPlus, amp, dim)?);
            Ok(gadgets::verify_parity(&rho)?.1)
        }
        WignerState::TeleportOutput => {
            let q = UnknownQubit::new(w.theta, w.phi)?;
            let rec = measure(&bsm_circuit(&prepare_total(&q, amp, dim)?)?, model, amp)?;
            let post = rec
                .get(QubitOutcome::G, CavitySign::Plus)
                .post_state
                .clone()
                .ok_or_else(|| Error::Degenerate("(g,+alpha) branch has no pure post state".into()))?;
            Ok(DensityOperator::from_pure(&post))
        }
    }
}

/// Grid coordinate `k` of `n` points over `[-extent, extent]`.
pub fn axis(k: usize, n: usize, extent: f64) -> f64 {
    if n == 1 {
        return 0.0;
    }
    if 2 * k + 1 == n {
        return 0.0;
    }
    -extent + 2.0 * extent * k as f64 / (n - 1) as f64
}

fn wigner_rows(w: &WignerOptions, dim: usize, model: MeasurementModel) -> Vec<Row> {
    let n = w.points;
    let coords: Vec<(usize, usize)> = (0..n).flat_map(|iy| (0..n).map(move |ix| (ix, iy))).collect();
    let keys = |ix: usize, iy: usize| {
        vec![
            Cell::Int(ix as u64),
            Cell::Int(iy as u64),
            Cell::Num(axis(ix, n, w.extent)),
            Cell::Num(axis(iy, n, w.extent)),
        ]
    };
    let evaluator = wigner_state(w, dim, model).and_then(|rho| WignerEvaluator::new(&rho, w.extent * SQRT_2));
    match evaluator {
        Ok(ev) => coords
            .into_par_iter()
            .map(|(ix, iy)| {
                let beta = C64::new(axis(ix, n, w.extent), axis(iy, n, w.extent));
                match ev.at(beta) {
                    Ok(v) => {
                        let mut cells = keys(ix, iy);
                        cells.push(Cell::Num(v));
                        Row::ok(cells)
                    }
                    Err(e) => Row::failed(keys(ix, iy), width(Experiment::WignerGrid), e),
                }
            })
            .collect(),
        Err(e) => {
            let msg = e.to_string();
            coords.into_iter().map(|(ix, iy)| Row::failed(keys(ix, iy), width(Experiment::WignerGrid), &msg)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_2_PI, PI};

    #[test]
    fn axis_is_symmetric_with_exact_centre() {
        assert_eq!(axis(20, 41, 3.0), 0.0);
        assert_eq!(axis(0, 41, 3.0), -3.0);
        assert_eq!(axis(40, 41, 3.0), 3.0);
    }

    #[test]
    fn columns_match_row_width() {
        let g = Resolved { theta: vec![0.5 * PI], phi: vec![0.0], alpha: vec![2.0], flux: vec![] };
        let cfg = SweepConfig::default();
        let rows = run_rows(&cfg, &g).unwrap();
        assert_eq!(rows[0].cells.len(), columns(Experiment::TeleportFidelity).len() - 1);
    }

    #[test]
    fn vacuum_peak() {
        let w = WignerOptions { state: WignerState::Vacuum, ..Default::default() };
        let rho = wigner_state(&w, 40, MeasurementModel::ProjectiveIdeal).unwrap();
        let v = WignerEvaluator::new(&rho, 0.0).unwrap().at(C64::new(0.0, 0.0)).unwrap();
        assert!((v - FRAC_2_PI).abs() < 1e-12);
    }

    #[test]
    fn failed_point_is_flagged_not_fatal() {
        let row = bsm_row(4.0, 0.0, 2.0, 40, MeasurementModel::ProjectiveIdeal);
        assert!(row.error.is_some());
        assert_eq!(row.cells.len(), width(Experiment::BsmStats));
        assert_eq!(row.cells[3], Cell::Empty);
    }
}
