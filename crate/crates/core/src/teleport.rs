//! Hybrid teleportation of a two-level qubit onto a CV qubit through an
//! entangled coherent state: preparation, the qubit-cavity Bell measurement,
//! feed-forward recovery and the quantum/classical fidelity theory.
//!
//! Mode labels: `A` is the unknown qubit, `B` and `C` hold the ECS channel.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    coherent_ket, phase_rotation, ry_half_pi, CoherentAmplitude, DensityOperator, Matrix, ModeSpec, StateVector, C64,
};
use crate::states::{ecs, CvQubit, EcsKind};

/// `cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnknownQubit {
    pub theta: f64,
    pub phi: f64,
}

impl UnknownQubit {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange(format!("theta = {theta} outside [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::OutOfRange(format!("phi = {phi} outside [0, 2 pi)")));
        }
        Ok(Self { theta, phi })
    }

    pub fn coefficients(&self) -> (C64, C64) {
        let (s, c) = (0.5 * self.theta).sin_cos();
        (C64::from(c), C64::from_polar(s, self.phi))
    }

    pub fn state(&self, label: &str) -> StateVector {
        let (a, b) = self.coefficients();
        StateVector::qubit(label, a, b)
    }

    /// The same coefficients carried by `{|alpha>, |-alpha>}`.
    pub fn as_cv_qubit(&self, alpha: CoherentAmplitude) -> CvQubit {
        let (a, b) = self.coefficients();
        CvQubit::new(a, b, alpha).expect("unit coefficients never cancel")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitOutcome {
    G,
    E,
}

impl QubitOutcome {
    pub fn level(self) -> usize {
        match self {
            QubitOutcome::G => 0,
            QubitOutcome::E => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            QubitOutcome::G => "g",
            QubitOutcome::E => "e",
        }
    }
}

/// Which coherent state, `|+alpha>` or `|-alpha>`, the cavity readout reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CavitySign {
    Plus,
    Minus,
}

impl CavitySign {
    pub fn factor(self) -> f64 {
        match self {
            CavitySign::Plus => 1.0,
            CavitySign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CavitySign::Plus => "+",
            CavitySign::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementModel {
    /// Rank-one elements `<q|<+-alpha|`, weights renormalized over the four outcomes.
    #[default]
    ProjectiveIdeal,
    /// Qubit in `{g, e}`; cavity displaced by alpha and tested for vacuum.
    /// A vacuum click reports `-alpha`.
    DisplacedVacuum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsmOutcome {
    pub qubit: QubitOutcome,
    pub cavity_sign: CavitySign,
    pub probability: f64,
    pub alpha: CoherentAmplitude,
    /// Normalized state of `C`; `None` when the conditioned state of `C` is
    /// not pure.
    pub post_state: Option<StateVector>,
}

/// The four outcomes of one Bell measurement, in the order
/// `(g,+) (g,-) (e,+) (e,-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub model: MeasurementModel,
    pub outcomes: Vec<BsmOutcome>,
}

impl MeasurementRecord {
    pub fn get(&self, qubit: QubitOutcome, sign: CavitySign) -> &BsmOutcome {
        self.outcomes
            .iter()
            .find(|o| o.qubit == qubit && o.cavity_sign == sign)
            .expect("all four outcomes are enumerated")
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// Draws one outcome from a seeded ChaCha8 stream.
    pub fn sample(&self, seed: u64) -> &BsmOutcome {
        self.sample_with(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> &BsmOutcome {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for o in &self.outcomes {
            acc += o.probability;
            if u < acc {
                return o;
            }
        }
        self.outcomes.iter().rev().find(|o| o.probability > 0.0).unwrap_or(&self.outcomes[3])
    }
}

const OUTCOMES: [(QubitOutcome, CavitySign); 4] = [
    (QubitOutcome::G, CavitySign::Plus),
    (QubitOutcome::G, CavitySign::Minus),
    (QubitOutcome::E, CavitySign::Plus),
    (QubitOutcome::E, CavitySign::Minus),
];

/// `|psi>_A (x) |ECS^{Phi+}>_BC`.
pub fn prepare_total(q: &UnknownQubit, alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    q.state("A").tensor(&ecs(EcsKind::PhiPlus, alpha, dim)?)
}

/// `|g><g| (x) 1 + |e><e| (x) exp(i phi n)` on (qubit, cavity).
pub fn conditional_phase(phi: f64, dim: usize) -> Matrix {
    let mut m = Matrix::zeros(2 * dim, 2 * dim);
    m.view_mut((0, 0), (dim, dim)).fill_with_identity();
    m.view_mut((dim, dim), (dim, dim)).copy_from(&phase_rotation(phi, dim));
    m
}

/// Conditional pi phase on `(A, B)` followed by `(1 + i sigma_y)/sqrt 2` on `A`.
pub fn bsm_circuit(state: &StateVector) -> Result<StateVector> {
    let dim = state.mode("B")?.dim();
    state.mode("A")?;
    state.apply(&conditional_phase(PI, dim), &["A", "B"])?.apply(&ry_half_pi(), &["A"])
}

fn single_mode(label: &str, amps: crate::fock::Ket) -> Result<StateVector> {
    let dim = amps.len();
    StateVector::new(vec![ModeSpec::cavity(label, dim)?], amps)
}

/// Enumerates the four Bell-measurement outcomes of a state that has already
/// passed through [`bsm_circuit`].
pub fn measure(state: &StateVector, model: MeasurementModel, alpha: CoherentAmplitude) -> Result<MeasurementRecord> {
    if !state.has_labels(&["A", "B"]) {
        return Err(Error::ModelMismatch("Bell measurement needs modes A and B".into()));
    }
    let dim = state.mode("B")?.dim();
    let plus = single_mode("B", coherent_ket(alpha, dim)?)?;
    let minus = single_mode("B", coherent_ket(alpha.neg(), dim)?)?;

    let mut raw = Vec::with_capacity(4);
    for (q, sign) in OUTCOMES {
        let level =
            if q == QubitOutcome::G { (C64::from(1.0), C64::from(0.0)) } else { (C64::from(0.0), C64::from(1.0)) };
        let branch = state.contract(&StateVector::qubit("A", level.0, level.1))?;
        let (weight, post) = match (model, sign) {
            (MeasurementModel::ProjectiveIdeal, CavitySign::Plus) | (_, CavitySign::Minus) => {
                let bra = if sign == CavitySign::Plus { &plus } else { &minus };
                let post = branch.contract(bra)?;
                (post.norm().powi(2), Some(post))
            }
            (MeasurementModel::DisplacedVacuum, CavitySign::Plus) => no_click(&branch, &plus, &minus)?,
        };
        raw.push((q, sign, weight, post));
    }
    let total: f64 = raw.iter().map(|r| r.2).sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("all Bell outcomes have zero weight".into()));
    }
    let outcomes = raw
        .into_iter()
        .map(|(qubit, cavity_sign, w, post)| BsmOutcome {
            qubit,
            cavity_sign,
            probability: w / total,
            alpha,
            post_state: post.and_then(|p| p.normalized().ok()),
        })
        .collect();
    Ok(MeasurementRecord { model, outcomes })
}

/// No vacuum click: element `1 - |-alpha><-alpha|` on B. The remaining state
/// of C is pure whenever B lies in span{|alpha>, |-alpha>}; it is read off by
/// contracting B with the normalized `(1 - |-alpha><-alpha|)|alpha>`.
fn no_click(branch: &StateVector, plus: &StateVector, minus: &StateVector) -> Result<(f64, Option<StateVector>)> {
    let total = branch.norm().powi(2);
    let clicked = branch.contract(minus)?.norm().powi(2);
    let weight = (total - clicked).max(0.0);
    let overlap = minus.inner(plus)?;
    let u = plus.add(&minus.scaled(-overlap))?;
    if u.norm() < 1e-12 || weight < 1e-300 {
        return Ok((weight, None));
    }
    let post = branch.contract(&u.normalized()?)?;
    let captured = post.norm().powi(2);
    let pure = (captured - weight).abs() <= 1e-9 * weight.max(1e-300) + 1e-14;
    Ok((weight, pure.then_some(post)))
}

/// Expresses a cavity state in `{|alpha>, |-alpha>}` by solving the Gram
/// system, then applies the feed-forward map for the outcome:
/// `(g,+)` identity, `(g,-)` pseudo-x, `(e,+)` pseudo-z, `(e,-)` pseudo-x after pseudo-z.
pub fn recover(outcome: &BsmOutcome) -> Result<CvQubit> {
    let post = outcome
        .post_state
        .as_ref()
        .ok_or_else(|| Error::ModelMismatch("outcome carries no pure post-measurement state".into()))?;
    let (a, b) = cv_coefficients(post, outcome.alpha)?;
    let q = CvQubit::unit(a, b, outcome.alpha)?;
    Ok(match (outcome.qubit, outcome.cavity_sign) {
        (QubitOutcome::G, CavitySign::Plus) => q,
        (QubitOutcome::G, CavitySign::Minus) => q.pseudo_x(),
        (QubitOutcome::E, CavitySign::Plus) => q.pseudo_z(),
        (QubitOutcome::E, CavitySign::Minus) => q.pseudo_z().pseudo_x(),
    })
}

/// Coefficients `(a, b)` with `psi = a|alpha> + b|-alpha>` in the least-squares
/// sense over the truncated space.
pub fn cv_coefficients(psi: &StateVector, alpha: CoherentAmplitude) -> Result<(C64, C64)> {
    let [mode] = psi.modes() else {
        return Err(Error::DimensionMismatch("expected a single cavity mode".into()));
    };
    let p = coherent_ket(alpha, mode.dim())?;
    let m = coherent_ket(alpha.neg(), mode.dim())?;
    let gram = Matrix2::new(p.dotc(&p), p.dotc(&m), m.dotc(&p), m.dotc(&m));
    let rhs = nalgebra::Vector2::new(p.dotc(psi.amplitudes()), m.dotc(psi.amplitudes()));
    let sol = gram.lu().solve(&rhs).ok_or_else(|| Error::Degenerate("|alpha> and |-alpha> coincide".into()))?;
    Ok((sol[0], sol[1]))
}

/// `W = 1 + 4 e^{-2|alpha|^2} cos(phi) cos(theta/2) sin(theta/2) + e^{-4|alpha|^2}`.
pub fn w_factor(theta: f64, phi: f64, alpha: f64) -> f64 {
    let e = (-2.0 * alpha * alpha).exp();
    let (s, c) = (0.5 * theta).sin_cos();
    1.0 + 4.0 * e * phi.cos() * c * s + e * e
}

/// `(a + b E, a E + b)` with `E = e^{-2|alpha|^2}`: the coefficients left on
/// C after the `(g, +alpha)` outcome.
pub fn tilde_coefficients(q: &UnknownQubit, alpha: CoherentAmplitude) -> (C64, C64) {
    let (a, b) = q.coefficients();
    let e = alpha.overlap_with_negative();
    (a + b * e, a * e + b)
}

/// Closed-form fidelity `|N~ N W|^2` of the `(g, +alpha)` branch.
pub fn fidelity_quantum(theta: f64, phi: f64, alpha: f64) -> f64 {
    let amp = CoherentAmplitude::real(alpha);
    let q = UnknownQubit { theta, phi };
    let (a, b) = q.coefficients();
    let (at, bt) = tilde_coefficients(&q, amp);
    let n = CvQubit::new(a, b, amp).map(|c| c.norm_const()).unwrap_or(f64::NAN);
    let nt = CvQubit::new(at, bt, amp).map(|c| c.norm_const()).unwrap_or(f64::NAN);
    (nt * n * w_factor(theta, phi, alpha)).powi(2)
}

/// Runs the full pipeline in Fock space and returns the fidelity of the
/// `(g, +alpha)` post state with the input qubit carried on `{|alpha>, |-alpha>}`.
pub fn simulated_fidelity(
    q: &UnknownQubit,
    alpha: CoherentAmplitude,
    dim: usize,
    model: MeasurementModel,
) -> Result<f64> {
    let record = measure(&bsm_circuit(&prepare_total(q, alpha, dim)?)?, model, alpha)?;
    let post = record
        .get(QubitOutcome::G, CavitySign::Plus)
        .post_state
        .clone()
        .ok_or_else(|| Error::Degenerate("(g,+alpha) branch has no pure post state".into()))?;
    let target = q.as_cv_qubit(alpha).materialize("C", dim)?;
    Ok(post.inner(&target)?.norm_sqr())
}

/// `1/2 (|alpha,alpha><alpha,alpha| + |-alpha,-alpha><-alpha,-alpha|)` on B, C.
pub fn classical_channel(alpha: CoherentAmplitude, dim: usize) -> Result<DensityOperator> {
    let modes = vec![ModeSpec::cavity("B", dim)?, ModeSpec::cavity("C", dim)?];
    let p = coherent_ket(alpha, dim)?;
    let m = coherent_ket(alpha.neg(), dim)?;
    let pp = StateVector::new(modes.clone(), p.kronecker(&p))?;
    let mm = StateVector::new(modes, m.kronecker(&m))?;
    DensityOperator::mixture(&[(0.5, &pp), (0.5, &mm)])
}

/// How the weights of `|alpha>` and `|-alpha>` after classical teleportation
/// are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalRoute {
    /// `f+ = c^2 + s^2 E^2 + c s E`, `f- = c^2 E^2 + s^2 + c s E` (phi = 0 only).
    Printed,
    /// `|a + b E|^2` and `|a E + b|^2`, what the Bell pipeline produces on the
    /// mixed channel for any phi.
    Pipeline,
}

/// Unnormalized weights `(w+, w-)` of `|alpha><alpha|` and `|-alpha><-alpha|`.
pub fn classical_weights(q: &UnknownQubit, alpha: CoherentAmplitude, route: ClassicalRoute) -> (f64, f64) {
    let e = alpha.overlap_with_negative();
    match route {
        ClassicalRoute::Printed => {
            let (s, c) = (0.5 * q.theta).sin_cos();
            let cross = c * s * e;
            (c * c + s * s * e * e + cross, c * c * e * e + s * s + cross)
        }
        ClassicalRoute::Pipeline => {
            let (at, bt) = tilde_coefficients(q, alpha);
            (at.norm_sqr(), bt.norm_sqr())
        }
    }
}

fn route_for(phi: f64) -> ClassicalRoute {
    if phi == 0.0 {
        ClassicalRoute::Printed
    } else {
        ClassicalRoute::Pipeline
    }
}

/// Output of classical teleportation on C, normalized to unit trace. Uses
/// the printed weights at `phi = 0` and the pipeline weights otherwise.
pub fn classical_teleport(q: &UnknownQubit, alpha: CoherentAmplitude, dim: usize) -> Result<DensityOperator> {
    classical_teleport_with(q, alpha, dim, route_for(q.phi))
}

pub fn classical_teleport_with(
    q: &UnknownQubit,
    alpha: CoherentAmplitude,
    dim: usize,
    route: ClassicalRoute,
) -> Result<DensityOperator> {
    let (wp, wm) = classical_weights(q, alpha, route);
    let p = single_mode("C", coherent_ket(alpha, dim)?)?;
    let m = single_mode("C", coherent_ket(alpha.neg(), dim)?)?;
    DensityOperator::mixture(&[(wp, &p), (wm, &m)])
}

/// Runs the Bell pipeline on `|psi>_A (x) rho_mix` in Fock space and returns
/// the normalized `(g, +alpha)` state of C.
pub fn classical_teleport_simulated(q: &UnknownQubit, alpha: CoherentAmplitude, dim: usize) -> Result<DensityOperator> {
    let modes = vec![ModeSpec::cavity("B", dim)?, ModeSpec::cavity("C", dim)?];
    let p = coherent_ket(alpha, dim)?;
    let m = coherent_ket(alpha.neg(), dim)?;
    let plus_b = single_mode("B", p.clone())?;
    let mut parts = Vec::with_capacity(2);
    for branch in [p.kronecker(&p), m.kronecker(&m)] {
        let total = q.state("A").tensor(&StateVector::new(modes.clone(), branch)?)?;
        let out = bsm_circuit(&total)?;
        let g = out.contract(&StateVector::qubit("A", C64::from(1.0), C64::from(0.0)))?;
        parts.push(g.contract(&plus_b)?);
    }
    let weights: Vec<(f64, &StateVector)> = parts.iter().map(|s| (0.5, s)).collect();
    let rho = unnormalized_mixture(&weights)?;
    rho.normalized()
}

fn unnormalized_mixture(parts: &[(f64, &StateVector)]) -> Result<DensityOperator> {
    let first = parts[0].1;
    let d = first.dim();
    let mut m = Matrix::zeros(d, d);
    for (w, psi) in parts {
        let a = psi.amplitudes();
        m += (a * a.adjoint()) * C64::from(*w);
    }
    DensityOperator::new(first.modes().to_vec(), m)
}

/// `cos^4(theta/2) + sin^4(theta/2)`: the best measure-and-prepare fidelity
/// for a fixed qubit direction.
pub fn fidelity_dv_classical(theta: f64) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    c.powi(4) + s.powi(4)
}

/// `<psi_fin| rho_Cl |psi_fin>` in closed form, with `psi_fin` the input
/// carried on `{|alpha>, |-alpha>}`.
pub fn fidelity_classical(theta: f64, phi: f64, alpha: f64) -> f64 {
    fidelity_classical_with(theta, phi, alpha, route_for(phi))
}

pub fn fidelity_classical_with(theta: f64, phi: f64, alpha: f64, route: ClassicalRoute) -> f64 {
    let amp = CoherentAmplitude::real(alpha);
    let q = UnknownQubit { theta, phi };
    let (wp, wm) = classical_weights(&q, amp, route);
    let cv = q.as_cv_qubit(amp);
    let e = amp.overlap_with_negative();
    let n2 = cv.norm_const().powi(2);
    // <psi|alpha> = N (a* + b* E), <psi|-alpha> = N (a* E + b*)
    let on_plus = n2 * (cv.a() + cv.b() * e).norm_sqr();
    let on_minus = n2 * (cv.a() * e + cv.b()).norm_sqr();
    (wp * on_plus + wm * on_minus) / (wp + wm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
    pub f_quantum: f64,
    pub f_classical: f64,
    pub f_dv_classical: f64,
}

impl FidelityReport {
    pub fn compute(theta: f64, phi: f64, alpha: f64) -> Self {
        Self {
            theta,
            phi,
            alpha,
            f_quantum: fidelity_quantum(theta, phi, alpha),
            f_classical: fidelity_classical(theta, phi, alpha),
            f_dv_classical: fidelity_dv_classical(theta),
        }
    }
}
