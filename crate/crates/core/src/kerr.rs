//! Cavity self-Kerr coefficient in a fluxonium-cavity-transmon chain.
//!
//! Qubit spectra are computed from their circuit Hamiltonians, the lowest
//! levels are coupled to the cavity in rotating-wave form, and K is read off
//! the dressed `|0_F 0_T n>` ladder as `E2 - 2 E1 + E0`. Energies in GHz,
//! K in kHz.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;

const GHZ_TO_KHZ: f64 = 1e6;
/// Largest level shift under basis doubling accepted as converged (1 kHz).
pub const CONVERGENCE_TOL_GHZ: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub ej: f64,
    pub ec: f64,
    /// Charge states `-cutoff ..= cutoff`.
    pub charge_cutoff: usize,
    pub n_levels_kept: usize,
}

impl Default for TransmonParams {
    fn default() -> Self {
        Self { ej: 38.0, ec: 0.25, charge_cutoff: 30, n_levels_kept: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxoniumParams {
    pub ej: f64,
    pub ec: f64,
    pub el: f64,
    /// External flux in units of the flux quantum.
    pub flux_ext: f64,
    /// Harmonic-oscillator states kept.
    pub basis_size: usize,
    pub n_levels_kept: usize,
}

impl Default for FluxoniumParams {
    fn default() -> Self {
        Self { ej: 8.5, ec: 3.0, el: 0.5, flux_ext: 0.141, basis_size: 120, n_levels_kept: 3 }
    }
}

impl FluxoniumParams {
    pub fn at_flux(&self, flux_ext: f64) -> Self {
        Self { flux_ext, ..*self }
    }
}

/// Lowest levels (ground shifted to zero) and `|<j|n|k>|` between them.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpectrum {
    pub levels: Vec<f64>,
    pub charge: RealMatrix,
}

impl QubitSpectrum {
    /// A single inert level: removes the qubit from the chain.
    pub fn absent() -> Self {
        Self { levels: vec![0.0], charge: RealMatrix::zeros(1, 1) }
    }

    pub fn transition(&self, j: usize, k: usize) -> f64 {
        self.levels[k] - self.levels[j]
    }
}

fn sorted_eigen(h: RealMatrix) -> (Vec<f64>, RealMatrix) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = RealMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn kept_spectrum(h: RealMatrix, charge_op: &RealMatrix, keep: usize) -> Result<QubitSpectrum> {
    if keep == 0 || keep > h.nrows() {
        return Err(Error::OutOfRange(format!("cannot keep {keep} levels of a {}-state basis", h.nrows())));
    }
    let (values, vectors) = sorted_eigen(h);
    let v = vectors.columns(0, keep).into_owned();
    let charge = (v.transpose() * charge_op * &v).map(f64::abs);
    let levels = values[..keep].iter().map(|e| e - values[0]).collect();
    Ok(QubitSpectrum { levels, charge })
}

fn check_doubling(what: &'static str, coarse: &QubitSpectrum, fine: &QubitSpectrum) -> Result<()> {
    let shift = coarse.levels.iter().zip(&fine.levels).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if shift > CONVERGENCE_TOL_GHZ {
        return Err(Error::Convergence { what, shift_ghz: shift });
    }
    Ok(())
}

fn transmon_at(p: &TransmonParams, cutoff: usize) -> Result<QubitSpectrum> {
    let n = 2 * cutoff + 1;
    let charge_op = RealMatrix::from_fn(n, n, |r, c| if r == c { r as f64 - cutoff as f64 } else { 0.0 });
    let h = RealMatrix::from_fn(n, n, |r, c| {
        if r == c {
            let q = r as f64 - cutoff as f64;
            4.0 * p.ec * q * q
        } else if r.abs_diff(c) == 1 {
            -0.5 * p.ej
        } else {
            0.0
        }
    });
    kept_spectrum(h, &charge_op, p.n_levels_kept)
}

/// `4 E_C n^2 - (E_J/2) sum (|n><n+1| + h.c.)` in the charge basis, zero
/// offset charge.
pub fn transmon_spectrum(p: &TransmonParams) -> Result<QubitSpectrum> {
    if p.charge_cutoff < 20 {
        return Err(Error::OutOfRange(format!("charge cutoff {} below 20", p.charge_cutoff)));
    }
    if p.ej / p.ec < 20.0 {
        log::warn!("E_J/E_C = {:.1} is outside the transmon regime", p.ej / p.ec);
    }
    let spec = transmon_at(p, p.charge_cutoff)?;
    check_doubling("transmon spectrum", &spec, &transmon_at(p, 2 * p.charge_cutoff)?)?;
    Ok(spec)
}

fn fluxonium_at(p: &FluxoniumParams, size: usize) -> Result<QubitSpectrum> {
    let phi_osc = (8.0 * p.ec / p.el).powf(0.25);
    let a = RealMatrix::from_fn(size, size, |r, c| if c == r + 1 { (c as f64).sqrt() } else { 0.0 });
    let ad = a.transpose();
    let phi = (&a + &ad) * (phi_osc / std::f64::consts::SQRT_2);
    // n = i (a^dag - a) / (sqrt 2 phi_osc); d = a^dag - a is real antisymmetric
    let d = &ad - &a;
    let n_scale = 1.0 / (std::f64::consts::SQRT_2 * phi_osc);
    let n_sq = -(&d * &d) * (n_scale * n_scale);
    let (w, v) = sorted_eigen(phi.clone());
    let shift = 2.0 * PI * p.flux_ext;
    let cos = &v
        * RealMatrix::from_diagonal(&DVector::from_iterator(size, w.iter().map(|x| (x - shift).cos())))
        * v.transpose();
    let h = n_sq * (4.0 * p.ec) + (&phi * &phi) * (0.5 * p.el) - cos * p.ej;
    let h = (&h + h.transpose()) * 0.5;
    kept_spectrum(h, &(d * n_scale), p.n_levels_kept)
}

/// `4 E_C n^2 + (E_L/2) phi^2 - E_J cos(phi - 2 pi flux_ext)` in the
/// harmonic-oscillator basis of the inductive part.
pub fn fluxonium_spectrum(p: &FluxoniumParams) -> Result<QubitSpectrum> {
    if p.el <= 0.0 {
        return Err(Error::OutOfRange(format!("E_L = {} must be positive", p.el)));
    }
    let spec = fluxonium_at(p, p.basis_size)?;
    check_doubling("fluxonium spectrum", &spec, &fluxonium_at(p, 2 * p.basis_size)?)?;
    Ok(spec)
}

/// `lambda_jk` for `j < k` on the lowest three levels, GHz.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelCouplings {
    pub l01: f64,
    pub l12: f64,
    pub l02: f64,
}

impl LevelCouplings {
    pub fn pairs(&self) -> [((usize, usize), f64); 3] {
        [((0, 1), self.l01), ((1, 2), self.l12), ((0, 2), self.l02)]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { l01: self.l01 * s, l12: self.l12 * s, l02: self.l02 * s }
    }

    /// `g |n_jk|` from a spectrum's charge matrix elements.
    pub fn from_charge(g: f64, spec: &QubitSpectrum) -> Self {
        let at = |j: usize, k: usize| if k < spec.levels.len() { g * spec.charge[(j, k)] } else { 0.0 };
        Self { l01: at(0, 1), l12: at(1, 2), l02: at(0, 2) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Explicit,
    DerivedFromMatrixElements { g_fluxonium: f64, g_transmon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub fluxonium: LevelCouplings,
    pub transmon: LevelCouplings,
    pub provenance: Provenance,
}

impl CouplingSet {
    /// Quoted device values at `|flux_ext| = 0.141`.
    pub fn reference() -> Self {
        Self {
            fluxonium: LevelCouplings { l01: 0.038, l12: 0.054, l02: 0.122 },
            transmon: LevelCouplings { l01: 0.10, l12: 0.141, l02: 0.0 },
            provenance: Provenance::Explicit,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { fluxonium: self.fluxonium.scaled(s), transmon: self.transmon.scaled(s), provenance: self.provenance }
    }
}

/// One coupling constant per qubit, `lambda_jk = g |n_jk|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub g_fluxonium: f64,
    pub g_transmon: f64,
}

impl Calibration {
    /// Fixes `g` so that `lambda_01` of each qubit matches `explicit` at the
    /// fluxonium parameters `reference`.
    pub fn from_reference(reference: &FluxoniumParams, tp: &TransmonParams, explicit: &CouplingSet) -> Result<Self> {
        let f = fluxonium_spectrum(reference)?;
        let t = transmon_spectrum(tp)?;
        Ok(Self {
            g_fluxonium: explicit.fluxonium.l01 / f.charge[(0, 1)],
            g_transmon: explicit.transmon.l01 / t.charge[(0, 1)],
        })
    }

    pub fn couplings(&self, f: &QubitSpectrum, t: &QubitSpectrum) -> CouplingSet {
        CouplingSet {
            fluxonium: LevelCouplings::from_charge(self.g_fluxonium, f),
            transmon: LevelCouplings::from_charge(self.g_transmon, t),
            provenance: Provenance::DerivedFromMatrixElements {
                g_fluxonium: self.g_fluxonium,
                g_transmon: self.g_transmon,
            },
        }
    }
}

/// Hamiltonian on fluxonium (x) transmon (x) Fock(`n_photon_max + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct FctHamiltonian {
    pub matrix: RealMatrix,
    pub n_fluxonium: usize,
    pub n_transmon: usize,
    pub n_photon_max: usize,
}

impl FctHamiltonian {
    pub fn index(&self, f: usize, t: usize, n: usize) -> usize {
        (f * self.n_transmon + t) * (self.n_photon_max + 1) + n
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

/// `sum w_j |j><j| + w_c a^dag a + sum lambda_jk (|k><j| a + |j><k| a^dag)`
/// over both qubits. A qubit given as [`QubitSpectrum::absent`] drops out.
pub fn assemble_hamiltonian(
    fluxonium: &QubitSpectrum,
    transmon: &QubitSpectrum,
    couplings: &CouplingSet,
    cavity_freq: f64,
    n_photon_max: usize,
) -> Result<FctHamiltonian> {
    if n_photon_max < 4 {
        return Err(Error::OutOfRange(format!("n_photon_max = {n_photon_max} below 4")));
    }
    let nf = fluxonium.levels.len().min(3);
    let nt = transmon.levels.len().min(3);
    let nc = n_photon_max + 1;
    let dim = nf * nt * nc;
    let mut h = FctHamiltonian { matrix: RealMatrix::zeros(dim, dim), n_fluxonium: nf, n_transmon: nt, n_photon_max };
    for f in 0..nf {
        for t in 0..nt {
            for n in 0..nc {
                let i = h.index(f, t, n);
                h.matrix[(i, i)] = fluxonium.levels[f] + transmon.levels[t] + cavity_freq * n as f64;
            }
        }
    }
    for ((j, k), l) in couplings.fluxonium.pairs() {
        if k >= nf || l == 0.0 {
            continue;
        }
        for t in 0..nt {
            for n in 1..nc {
                // |k><j| a : |j, n> -> sqrt(n) |k, n-1>
                let (from, to) = (h.index(j, t, n), h.index(k, t, n - 1));
                let v = l * (n as f64).sqrt();
                h.matrix[(to, from)] += v;
                h.matrix[(from, to)] += v;
            }
        }
    }
    for ((j, k), l) in couplings.transmon.pairs() {
        if k >= nt || l == 0.0 {
            continue;
        }
        for f in 0..nf {
            for n in 1..nc {
                let (from, to) = (h.index(f, j, n), h.index(f, k, n - 1));
                let v = l * (n as f64).sqrt();
                h.matrix[(to, from)] += v;
                h.matrix[(from, to)] += v;
            }
        }
    }
    if h.matrix.nrows() != dim {
        return Err(Error::DimensionMismatch("Hamiltonian size".into()));
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrResult {
    /// Dressed cavity frequency, GHz.
    pub omega_tilde: f64,
    /// Self-Kerr coefficient, kHz.
    pub k_khz: f64,
    /// Dressed energies of the 0, 1, 2 photon branches, GHz.
    pub dressed_energies: [f64; 3],
}

/// Picks the eigenstates with largest weight on `|0_F 0_T n>`, `n = 0, 1, 2`,
/// and fits `omega~ n + K n^2 / 2` through them.
pub fn extract_kerr(h: &FctHamiltonian) -> Result<KerrResult> {
    let (values, vectors) = sorted_eigen(h.matrix.clone());
    let mut energies = [0.0; 3];
    for (n, e) in energies.iter_mut().enumerate() {
        let row = h.index(0, 0, n);
        let (best, overlap) = (0..values.len())
            .map(|c| (c, vectors[(row, c)].powi(2)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty spectrum");
        if overlap < 0.5 {
            return Err(Error::AmbiguousBranch { photons: n, overlap });
        }
        *e = values[best];
    }
    let k = energies[2] - 2.0 * energies[1] + energies[0];
    Ok(KerrResult {
        omega_tilde: energies[1] - energies[0] - 0.5 * k,
        k_khz: k * GHZ_TO_KHZ,
        dressed_energies: energies,
    })
}

/// Which qubits are attached to the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chain {
    TransmonOnly,
    FluxoniumOnly,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub transmon: TransmonParams,
    pub fluxonium: FluxoniumParams,
    pub cavity_freq: f64,
    pub couplings: CouplingSet,
    pub n_photon_max: usize,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            transmon: TransmonParams::default(),
            fluxonium: FluxoniumParams::default(),
            cavity_freq: 9.2,
            couplings: CouplingSet::reference(),
            n_photon_max: 6,
        }
    }
}

impl DeviceParams {
    /// K for the chosen chain with the stored couplings.
    pub fn kerr(&self, chain: Chain) -> Result<KerrResult> {
        let f = match chain {
            Chain::TransmonOnly => QubitSpectrum::absent(),
            _ => fluxonium_spectrum(&self.fluxonium)?,
        };
        let t = match chain {
            Chain::FluxoniumOnly => QubitSpectrum::absent(),
            _ => transmon_spectrum(&self.transmon)?,
        };
        extract_kerr(&assemble_hamiltonian(&f, &t, &self.couplings, self.cavity_freq, self.n_photon_max)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub flux_ext: f64,
    pub couplings: Option<CouplingSet>,
    pub result: Result<KerrResult>,
}

/// K over a flux grid with couplings derived from the charge matrix elements
/// at each point. Failures are kept per point; output follows grid order.
pub fn kerr_flux_sweep(
    fp_template: &FluxoniumParams,
    tp: &TransmonParams,
    cavity_freq: f64,
    flux_grid: &[f64],
    calibration: &Calibration,
    n_photon_max: usize,
) -> Result<Vec<SweepPoint>> {
    let transmon = transmon_spectrum(tp)?;
    Ok(flux_grid
        .par_iter()
        .map(|&flux| {
            let point = fluxonium_spectrum(&fp_template.at_flux(flux)).and_then(|f| {
                let c = calibration.couplings(&f, &transmon);
                let k = extract_kerr(&assemble_hamiltonian(&f, &transmon, &c, cavity_freq, n_photon_max)?)?;
                Ok((c, k))
            });
            match point {
                Ok((c, k)) => SweepPoint { flux_ext: flux, couplings: Some(c), result: Ok(k) },
                Err(e) => SweepPoint { flux_ext: flux, couplings: None, result: Err(e) },
            }
        })
        .collect())
}

/// Fits `c + omega n + K n^2 / 2` exactly through three energies; returns
/// `(omega, K)`.
pub fn fit_ladder(energies: [f64; 3]) -> Option<(f64, f64)> {
    let m = nalgebra::Matrix3::new(1.0, 0.0, 0.0, 1.0, 1.0, 0.5, 1.0, 2.0, 2.0);
    let sol = m.lu().solve(&nalgebra::Vector3::from(energies))?;
    Some((sol[1], sol[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn transmon_matches_asymptotics() {
        let s = transmon_spectrum(&TransmonParams::default()).unwrap();
        let oracle = (8.0f64 * 38.0 * 0.25).sqrt() - 0.25;
        assert!(near(s.transition(0, 1), oracle, 0.02), "{}", s.transition(0, 1));
        assert!(s.charge[(0, 2)] < 1e-8);
        assert!(s.charge[(0, 1)] > 1.0);

        let deep = TransmonParams { ej: 2500.0, ec: 0.25, charge_cutoff: 60, n_levels_kept: 3 };
        let d = transmon_spectrum(&deep).unwrap();
        let anharm = d.transition(1, 2) - d.transition(0, 1);
        assert!(near(anharm, -0.25, 0.02), "{anharm}");
    }

    #[test]
    fn transmon_cutoff_guard() {
        let p = TransmonParams { charge_cutoff: 10, ..Default::default() };
        assert!(transmon_spectrum(&p).is_err());
    }

    #[test]
    fn fluxonium_ordering_and_selection_rules() {
        for flux in [-0.5, -0.3, 0.0, 0.141, 0.25, 0.5] {
            let s = fluxonium_spectrum(&FluxoniumParams::default().at_flux(flux)).unwrap();
            assert!(s.levels[0] == 0.0 && s.levels[1] > 0.0 && s.levels[2] > s.levels[1], "{flux}: {:?}", s.levels);
        }
        // parity symmetry at the sweet spots forbids 0-2, lifted in between
        for flux in [0.0, 0.5] {
            let s = fluxonium_spectrum(&FluxoniumParams::default().at_flux(flux)).unwrap();
            assert!(s.charge[(0, 2)] < 1e-8, "{flux}");
        }
        let s = fluxonium_spectrum(&FluxoniumParams::default()).unwrap();
        assert!(s.charge[(0, 2)] > 1e-2);
    }

    #[test]
    fn fluxonium_convergence_guard() {
        let small = FluxoniumParams { basis_size: 15, ..Default::default() };
        assert!(matches!(fluxonium_spectrum(&small), Err(Error::Convergence { .. })));
    }

    #[test]
    fn derived_couplings_track_quoted_ratios() {
        let s = fluxonium_spectrum(&FluxoniumParams::default()).unwrap();
        let quoted = CouplingSet::reference().fluxonium;
        let g = quoted.l01 / s.charge[(0, 1)];
        let derived = LevelCouplings::from_charge(g, &s);
        assert!(near(derived.l12, quoted.l12, 0.25), "{derived:?}");
        assert!(near(derived.l02, quoted.l02, 0.25), "{derived:?}");
    }

    #[test]
    fn zero_coupling_is_bare_ladder() {
        let f = fluxonium_spectrum(&FluxoniumParams::default()).unwrap();
        let t = transmon_spectrum(&TransmonParams::default()).unwrap();
        let c = CouplingSet::reference().scaled(0.0);
        let h = assemble_hamiltonian(&f, &t, &c, 9.2, 6).unwrap();
        let mut ev: Vec<f64> = h.matrix.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut bare = Vec::new();
        for a in &f.levels {
            for b in &t.levels {
                for n in 0..7 {
                    bare.push(a + b + 9.2 * n as f64);
                }
            }
        }
        bare.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&bare) {
            assert!((x - y).abs() < 1e-10);
        }
        let k = extract_kerr(&h).unwrap();
        assert_eq!(k.k_khz, 0.0);
        assert!((k.omega_tilde - 9.2).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let t = transmon_spectrum(&TransmonParams::default()).unwrap();
        let h = assemble_hamiltonian(&QubitSpectrum::absent(), &t, &CouplingSet::reference(), 9.2, 6).unwrap();
        assert!(h.hermiticity_residual() < 1e-12);
        assert!(assemble_hamiltonian(&QubitSpectrum::absent(), &t, &CouplingSet::reference(), 9.2, 3).is_err());
    }

    #[test]
    fn three_point_fit_recovers_k() {
        let k = DeviceParams::default().kerr(Chain::TransmonOnly).unwrap();
        let (omega, kk) = fit_ladder(k.dressed_energies).unwrap();
        assert!(((kk * GHZ_TO_KHZ) - k.k_khz).abs() <= 1e-9 * k.k_khz.abs());
        assert!((omega - k.omega_tilde).abs() < 1e-12);
    }

    #[test]
    fn dressed_shift_is_bounded() {
        let k = DeviceParams::default().kerr(Chain::Both).unwrap();
        assert!(k.dressed_energies[0].abs() < 0.2);
        assert!(k.k_khz.is_finite());
    }

    #[test]
    fn ambiguous_branch_is_reported() {
        // harmonic three-level qubit on resonance: the two-photon manifold
        // splits three ways and no state keeps half the bare weight
        let t = QubitSpectrum { levels: vec![0.0, 9.2, 18.4], charge: RealMatrix::zeros(3, 3) };
        let mut c = CouplingSet::reference();
        c.transmon = LevelCouplings { l01: 0.5, l12: 0.5, l02: 0.0 };
        let h = assemble_hamiltonian(&QubitSpectrum::absent(), &t, &c, 9.2, 6).unwrap();
        assert!(matches!(extract_kerr(&h), Err(Error::AmbiguousBranch { .. })));
    }
}
