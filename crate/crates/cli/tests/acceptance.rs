//! One pass/fail line per acceptance criterion. Exits non-zero if any fails.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::path::Path;
use std::time::{Duration, Instant};

use hybridcv::fock::{pure_fidelity, CoherentAmplitude, DensityOperator, WignerEvaluator, C64};
use hybridcv::gadgets::{
    build_ghz, ghz_bell_form, ghz_cat_form, mean_rounds, pauli_x_until_success, success_probability, verify_parity,
};
use hybridcv::kerr::{Chain, DeviceParams};
use hybridcv::states::{create_ecs_circuit, ecs, EcsKind};
use hybridcv::teleport::{
    bsm_circuit, classical_channel, fidelity_classical, fidelity_dv_classical, fidelity_quantum, measure,
    prepare_total, simulated_fidelity, MeasurementModel, MeasurementRecord, UnknownQubit,
};
use hybridcv_cli::presets::preset;
use hybridcv_cli::{render, RunOptions, SweepConfig};

const MODELS: [MeasurementModel; 2] = [MeasurementModel::ProjectiveIdeal, MeasurementModel::DisplacedVacuum];

fn amp(a: f64) -> CoherentAmplitude {
    CoherentAmplitude::real(a)
}

fn theta_grid() -> Vec<f64> {
    (0..=64).map(|k| PI * k as f64 / 64.0).collect()
}

fn record(theta: f64, alpha: f64, model: MeasurementModel) -> MeasurementRecord {
    let q = UnknownQubit::new(theta, 0.0).unwrap();
    let a = amp(alpha);
    let dim = a.required_dim();
    measure(&bsm_circuit(&prepare_total(&q, a, dim).unwrap()).unwrap(), model, a).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut dev: f64 = 0.0;
    for a in [0.2, 0.5, 1.0, 2.0, 3.0] {
        dev = dev.max((fidelity_quantum(FRAC_PI_2, 0.0, a) - 1.0).abs());
        let q = UnknownQubit::new(FRAC_PI_2, 0.0).unwrap();
        for model in MODELS {
            let f = simulated_fidelity(&q, amp(a), amp(a).required_dim(), model).unwrap();
            dev = dev.max((f - 1.0).abs());
        }
    }
    let t = start.elapsed();
    check(
        dev < 1e-9 && t < Duration::from_secs(1),
        format!("max |F_qu - 1| = {dev:.2e} (tol 1e-9), {t:.2?} (budget 1 s)"),
    )
}

fn c2() -> Outcome {
    let start = Instant::now();
    let ceiling = fidelity_classical(FRAC_PI_2, 0.0, 2.0);
    let dv = theta_grid()
        .into_iter()
        .map(|t| (fidelity_classical(t, 0.0, 3.0) - fidelity_dv_classical(t)).abs())
        .fold(0.0, f64::max);
    let t = start.elapsed();
    check(
        (ceiling - 0.5).abs() < 2e-3 && dv < 1e-4 && t < Duration::from_secs(5),
        format!("F_cl(pi/2, 2) = {ceiling:.6} (tol 2e-3), max |F_cl(alpha=3) - DV| = {dv:.2e} (tol 1e-4), {t:.2?}"),
    )
}

fn c3() -> Outcome {
    let start = Instant::now();
    let mut dev: f64 = 0.0;
    let mut n = 0;
    for a in [0.2, 0.5, 1.0, 2.0, 3.0] {
        for k in 0..=16 {
            let theta = PI * k as f64 / 16.0;
            for p in [0.0, FRAC_PI_2, PI, 1.5 * PI] {
                let q = UnknownQubit::new(theta, p).unwrap();
                let sim = simulated_fidelity(&q, amp(a), 40, MeasurementModel::ProjectiveIdeal).unwrap();
                dev = dev.max((sim - fidelity_quantum(theta, p, a)).abs());
                n += 1;
            }
        }
    }
    let t = start.elapsed();
    check(
        dev < 1e-8 && t < Duration::from_secs(60),
        format!("{n} grid points at dim 40, max |closed - simulated| = {dev:.2e} (tol 1e-8), {t:.2?} (budget 60 s)"),
    )
}

fn c4() -> Outcome {
    let mut sum_dev: f64 = 0.0;
    for model in MODELS {
        for theta in [0.0, 1.0, FRAC_PI_2, PI] {
            for a in [0.3, 1.0, 2.0] {
                sum_dev = sum_dev.max((record(theta, a, model).total_probability() - 1.0).abs());
            }
        }
    }
    let quarter = record(FRAC_PI_2, 2.0, MeasurementModel::ProjectiveIdeal)
        .outcomes
        .iter()
        .map(|o| (o.probability - 0.25).abs())
        .fold(0.0, f64::max);
    let small = record(FRAC_PI_2, 0.3, MeasurementModel::ProjectiveIdeal)
        .outcomes
        .iter()
        .map(|o| (o.probability - 0.25).abs())
        .fold(0.0, f64::max);
    check(
        sum_dev < 1e-10 && quarter < 1e-3 && small > 0.05,
        format!(
            "max |sum p - 1| = {sum_dev:.2e} (tol 1e-10), max |p - 1/4| at alpha=2: {quarter:.2e} (tol 1e-3), at alpha=0.3: {small:.3} (> 0.05)"
        ),
    )
}

fn c5() -> Outcome {
    let a = amp(2.0);
    let dim = a.scale(2.0).required_dim();
    let out = create_ecs_circuit(a, dim).unwrap();
    let bc = out.reduced(&["B", "C"]).unwrap();
    let target = ecs(EcsKind::PhiPlus, a, dim).unwrap();
    let f = bc.fidelity(&target).unwrap();
    check(f >= 0.999, format!("F(circuit, ECS Phi+) = {f:.9} (>= 0.999)"))
}

fn c6() -> Outcome {
    let a = amp(2.0);
    let dim = a.required_dim();
    let (p_ecs, b_ecs) = verify_parity(&DensityOperator::from_pure(&ecs(EcsKind::PhiPlus, a, dim).unwrap())).unwrap();
    let (p_mix, b_mix) = verify_parity(&classical_channel(a, dim).unwrap()).unwrap();
    let origin = C64::new(0.0, 0.0);
    let w_ecs = WignerEvaluator::new(&b_ecs, 0.0).unwrap().at(origin).unwrap();
    let w_mix = WignerEvaluator::new(&b_mix, 0.0).unwrap().at(origin).unwrap();
    check(
        p_ecs >= 0.999 && p_mix.abs() <= 1e-6 && (w_ecs - FRAC_2_PI).abs() < 1e-6 && w_mix <= 3e-4,
        format!("parity ECS {p_ecs:.9} (>= 0.999), mixture {p_mix:.2e} (<= 1e-6); W_B(0) ECS {w_ecs:.6} (2/pi), mixture {w_mix:.2e} (<= 3e-4)"),
    )
}

fn c7() -> Outcome {
    let mut eq_dev: f64 = 0.0;
    for a in [0.5, 1.0, 2.0] {
        let dim = amp(a).required_dim();
        let bell = ghz_bell_form(amp(a), dim).unwrap();
        let cat = ghz_cat_form(amp(a), dim).unwrap();
        let built = build_ghz(amp(a), dim).unwrap();
        eq_dev = eq_dev
            .max((pure_fidelity(&bell, &cat).unwrap() - 1.0).abs())
            .max((pure_fidelity(&built, &bell).unwrap() - 1.0).abs());
    }
    let a = amp(2.0);
    let dim = a.required_dim();
    let p = success_probability(&build_ghz(a, dim).unwrap()).unwrap();
    let run = pauli_x_until_success(a, dim, 64, 1).unwrap();
    let f = pure_fidelity(&run.channel, &ecs(EcsKind::PsiPlus, a, dim).unwrap()).unwrap();
    let mean = mean_rounds(a, dim, 10_000, 64, 2024).unwrap();
    check(
        eq_dev < 1e-9 && (p - 0.5).abs() < 1e-3 && f >= 1.0 - 1e-6 && (mean - 2.0).abs() <= 0.05 * 2.0,
        format!(
            "|F(Bell form, cat form) - 1| = {eq_dev:.2e} (tol 1e-9), p_success = {p:.6} (0.5 +- 1e-3), F(out, ECS Psi+) = {f:.9}, mean rounds = {mean:.4} (2 +- 5%)"
        ),
    )
}

fn c8() -> Outcome {
    let start = Instant::now();
    let d = DeviceParams::default();
    let t = d.kerr(Chain::TransmonOnly).unwrap().k_khz;
    let f = d.kerr(Chain::FluxoniumOnly).unwrap().k_khz;
    let b = d.kerr(Chain::Both).unwrap().k_khz;
    let per_point = start.elapsed() / 3;
    let doubled = |edit: fn(&mut DeviceParams)| {
        let mut dd = d;
        edit(&mut dd);
        (dd.kerr(Chain::Both).unwrap().k_khz - b).abs()
    };
    let shift = doubled(|d| d.transmon.charge_cutoff *= 2)
        .max(doubled(|d| d.fluxonium.basis_size *= 2))
        .max(doubled(|d| d.n_photon_max *= 2));
    let ok_t = (t + 66.7).abs() <= 0.15 * 66.7;
    let ok_f = (f - 170.8).abs() <= 0.15 * 170.8;
    let ok_b = b.abs() < 10.0;
    check(
        ok_t && ok_f && ok_b && shift < 0.5 && per_point < Duration::from_secs(30),
        format!(
            "transmon-only {t:.2} kHz (-66.7 +- 15%) {}, fluxonium-only {f:.2} kHz (170.8 +- 15%) {}, combined {b:.2} kHz (|K| < 10) {}, doubling shift {shift:.3} kHz (< 0.5), {per_point:.2?}/point",
            mark(ok_t),
            mark(ok_f),
            mark(ok_b)
        ),
    )
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn column(csv: &[u8], name: &str) -> Vec<Option<f64>> {
    let text = std::str::from_utf8(csv).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).and_then(|v| v.parse().ok())).collect()
}

fn c9() -> Outcome {
    let cfg = preset("fig4").unwrap();
    let out = render(&cfg, &RunOptions::default()).unwrap();
    let ks: Vec<f64> = column(&out.bytes, "k_khz").into_iter().flatten().collect();
    let complete = ks.len() == out.rows;
    let monotone = ks.windows(2).all(|w| w[1] > w[0]) || ks.windows(2).all(|w| w[1] < w[0]);
    let sign_change = ks.windows(2).any(|w| w[0] * w[1] < 0.0);
    let min = ks.iter().map(|k| k.abs()).fold(f64::INFINITY, f64::min);
    check(
        complete && monotone && sign_change,
        format!(
            "fig4 window 0.10..0.20: K from {:.1} to {:.1} kHz, monotone {}, sign change {}, min |K| = {min:.1} kHz",
            ks.first().copied().unwrap_or(f64::NAN),
            ks.last().copied().unwrap_or(f64::NAN),
            mark(monotone),
            mark(sign_change)
        ),
    )
}

fn c10() -> Outcome {
    let opts = RunOptions { jobs: Some(2), timestamp: false };
    let mut identical = true;
    for name in ["fig2b", "fig4"] {
        let cfg = preset(name).unwrap();
        let first = render(&cfg, &opts).unwrap().bytes;
        let second = render(&cfg, &RunOptions { jobs: Some(1), ..opts.clone() }).unwrap().bytes;
        let reloaded = SweepConfig::from_toml(&cfg.to_toml(), Path::new(name)).unwrap();
        let third = render(&reloaded, &opts).unwrap().bytes;
        identical &= first == second && first == third;
    }

    let mut f_shift: f64 = 0.0;
    for a in [0.5, 2.0, 3.0] {
        let d = amp(a).required_dim();
        for theta in [1.0, FRAC_PI_2] {
            let q = UnknownQubit::new(theta, 0.5).unwrap();
            for model in MODELS {
                let f1 = simulated_fidelity(&q, amp(a), d, model).unwrap();
                let f2 = simulated_fidelity(&q, amp(a), 2 * d, model).unwrap();
                f_shift = f_shift.max((f1 - f2).abs());
            }
        }
    }
    let d = DeviceParams::default();
    let k0 = d.kerr(Chain::Both).unwrap().k_khz;
    let mut dd = d;
    dd.n_photon_max *= 2;
    let k_shift = (dd.kerr(Chain::Both).unwrap().k_khz - k0).abs();
    check(
        identical && f_shift < 1e-8 && k_shift < 0.5,
        format!(
            "presets byte-identical across runs and config round-trip: {}, fidelity shift under dim doubling {f_shift:.2e} (tol 1e-8), K shift {k_shift:.3} kHz (tol 0.5)",
            mark(identical)
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("quantum-fidelity unity line", c1),
        ("classical ceiling", c2),
        ("closed form vs simulation", c3),
        ("BSM statistics", c4),
        ("ECS circuit", c5),
        ("verification discrimination", c6),
        ("Pauli-x gadget", c7),
        ("Kerr reproductions", c8),
        ("fig4 sweep sign change", c9),
        ("determinism and truncation", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
