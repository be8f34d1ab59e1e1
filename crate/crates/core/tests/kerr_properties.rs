use hybridcv::kerr::*;

fn device() -> DeviceParams {
    DeviceParams::default()
}

#[test]
fn reproductions_with_quoted_couplings() {
    let d = device();
    let t = d.kerr(Chain::TransmonOnly).unwrap().k_khz;
    let f = d.kerr(Chain::FluxoniumOnly).unwrap().k_khz;
    assert!((t - -66.7).abs() <= 0.15 * 66.7, "transmon only {t}");
    assert!((f - 170.8).abs() <= 0.15 * 170.8, "fluxonium only {f}");
}

#[test]
fn kerr_stable_under_basis_doubling() {
    let base = device();
    let k0 = base.kerr(Chain::Both).unwrap().k_khz;
    let mut d = base;
    d.transmon.charge_cutoff *= 2;
    assert!((d.kerr(Chain::Both).unwrap().k_khz - k0).abs() < 0.5);
    let mut d = base;
    d.fluxonium.basis_size *= 2;
    assert!((d.kerr(Chain::Both).unwrap().k_khz - k0).abs() < 0.5);
    let mut d = base;
    d.n_photon_max *= 2;
    assert!((d.kerr(Chain::Both).unwrap().k_khz - k0).abs() < 0.5);
}

#[test]
fn sweep_keeps_grid_order_and_flags_failures() {
    let d = device();
    let cal = Calibration::from_reference(&d.fluxonium, &d.transmon, &d.couplings).unwrap();
    let mut fp = d.fluxonium;
    fp.basis_size = 12;
    let grid = [0.12, 0.14, 0.16];
    let out = kerr_flux_sweep(&fp, &d.transmon, d.cavity_freq, &grid, &cal, d.n_photon_max).unwrap();
    assert_eq!(out.iter().map(|p| p.flux_ext).collect::<Vec<_>>(), grid);
    assert!(out.iter().all(|p| p.result.is_err()));
}

#[test]
fn derived_coupling_sweep_has_monotone_sign_change() {
    // away from the quoted operating point, where the derived couplings
    // carry K through zero
    let d = device();
    let cal = Calibration::from_reference(&d.fluxonium, &d.transmon, &d.couplings).unwrap();
    let grid: Vec<f64> = (0..=8).map(|i| 0.400 + 0.004 * i as f64).collect();
    let ks: Vec<f64> = kerr_flux_sweep(&d.fluxonium, &d.transmon, d.cavity_freq, &grid, &cal, d.n_photon_max)
        .unwrap()
        .into_iter()
        .map(|p| p.result.unwrap().k_khz)
        .collect();
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
    assert!(ks[0] > 0.0 && ks[ks.len() - 1] < 0.0, "{ks:?}");
}

#[test]
fn calibration_reproduces_reference_lambda01() {
    let d = device();
    let cal = Calibration::from_reference(&d.fluxonium, &d.transmon, &d.couplings).unwrap();
    let f = fluxonium_spectrum(&d.fluxonium).unwrap();
    let t = transmon_spectrum(&d.transmon).unwrap();
    let c = cal.couplings(&f, &t);
    assert!((c.fluxonium.l01 - 0.038).abs() < 1e-12);
    assert!((c.transmon.l01 - 0.10).abs() < 1e-12);
    assert!((c.transmon.l12 - 0.141).abs() < 0.15 * 0.141);
}
