//! ECS verification through pseudo-ZZ and parity correlations, and the
//! repeat-until-success pseudo Pauli-x gate driven by two ancilla qubits.
//!
//! Mode labels: `B` and `C` hold the ECS, `A` and `X` are the ancillas.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    coherent_ket, hadamard, phase_rotation, wigner_point, CoherentAmplitude, DensityOperator, Ket, Matrix, StateVector,
    C64,
};
use crate::states::{cat_superposition, ecs, CatParity, EcsKind};
use crate::teleport::{MeasurementModel, QubitOutcome};

pub const ECS_THRESHOLD: f64 = 0.9;
pub const MIXTURE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithEcs,
    ConsistentWithMixture,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub zz_correlation: f64,
    pub parity_correlation: f64,
    pub fringe_wigner_origin: f64,
    pub verdict: Verdict,
}

/// Both hypotheses need `zz >= 0.9`. The ECS shows parity correlation and a
/// normalized central fringe `(pi/2) W(0)` of at least 0.9; the mixture shows
/// both at most 0.1.
pub fn verdict(zz: f64, parity: f64, fringe: f64) -> Verdict {
    let fringe = 0.5 * PI * fringe;
    if zz < ECS_THRESHOLD {
        Verdict::Inconclusive
    } else if parity >= ECS_THRESHOLD && fringe >= ECS_THRESHOLD {
        Verdict::ConsistentWithEcs
    } else if parity <= MIXTURE_THRESHOLD && fringe.abs() <= MIXTURE_THRESHOLD {
        Verdict::ConsistentWithMixture
    } else {
        Verdict::Inconclusive
    }
}

fn two_cavity(rho: &DensityOperator) -> Result<(DensityOperator, usize)> {
    let bc = rho.partial_trace(&["B", "C"])?;
    let db = bc.modes()[0].dim();
    if bc.modes()[1].dim() != db {
        return Err(Error::DimensionMismatch("cavities B and C need the same cutoff".into()));
    }
    Ok((bc, db))
}

fn sandwich(m: &Matrix, v: &Ket) -> f64 {
    v.dotc(&(m * v)).re
}

/// Correlation `<s_B s_C>` of the `{+alpha, -alpha}` readouts on B and C.
pub fn verify_zz(rho: &DensityOperator, alpha: CoherentAmplitude, model: MeasurementModel) -> Result<f64> {
    let (bc, dim) = two_cavity(rho)?;
    let p = coherent_ket(alpha, dim)?;
    let m = coherent_ket(alpha.neg(), dim)?;
    let mat = bc.matrix();
    // probabilities in the order (+,+) (+,-) (-,+) (-,-)
    let probs = match model {
        MeasurementModel::ProjectiveIdeal => {
            let raw = [
                sandwich(mat, &p.kronecker(&p)),
                sandwich(mat, &p.kronecker(&m)),
                sandwich(mat, &m.kronecker(&p)),
                sandwich(mat, &m.kronecker(&m)),
            ];
            let total: f64 = raw.iter().sum();
            if total <= 0.0 {
                return Err(Error::Degenerate("no weight on the coherent readout basis".into()));
            }
            raw.map(|x| x / total)
        }
        MeasurementModel::DisplacedVacuum => {
            let trace = bc.trace().re;
            let mm = sandwich(mat, &m.kronecker(&m));
            let b_minus = sandwich(bc.partial_trace(&["B"])?.matrix(), &m);
            let c_minus = sandwich(bc.partial_trace(&["C"])?.matrix(), &m);
            let raw = [trace - b_minus - c_minus + mm, c_minus - mm, b_minus - mm, mm];
            raw.map(|x| x / trace)
        }
    };
    Ok(probs[0] - probs[1] - probs[2] + probs[3])
}

/// Returns `<P_B P_C>` and the state of B conditioned on even parity in C.
pub fn verify_parity(rho: &DensityOperator) -> Result<(f64, DensityOperator)> {
    let (bc, dim) = two_cavity(rho)?;
    let mat = bc.matrix();
    let trace = bc.trace().re;
    let mut corr = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            corr += sign * mat[(i * dim + j, i * dim + j)].re;
        }
    }
    let cond = Matrix::from_fn(dim, dim, |r, c| (0..dim).step_by(2).map(|k| mat[(r * dim + k, c * dim + k)]).sum());
    let weight = cond.trace().re;
    if weight <= 1e-300 {
        return Err(Error::Degenerate("no weight on even parity in C".into()));
    }
    let b = DensityOperator::new(vec![bc.modes()[0].clone()], cond.unscale(weight))?;
    Ok((corr / trace, b))
}

pub fn verify(rho: &DensityOperator, alpha: CoherentAmplitude, model: MeasurementModel) -> Result<VerificationReport> {
    let zz = verify_zz(rho, alpha, model)?;
    let (parity, b) = verify_parity(rho)?;
    let fringe = wigner_point(&b, C64::from(0.0))?;
    Ok(VerificationReport {
        zz_correlation: zz,
        parity_correlation: parity,
        fringe_wigner_origin: fringe,
        verdict: verdict(zz, parity, fringe),
    })
}

// ---------------------------------------------------------------------------
// pseudo Pauli-x

/// Hadamards on fresh ancillas A and X, then `C^{e,pi}_{AB}` and `C^{e,pi}_{XC}`.
/// `channel` lives on B, C.
pub fn entangle_ancillas(channel: &StateVector) -> Result<StateVector> {
    let dim_b = channel.mode("B")?.dim();
    let dim_c = channel.mode("C")?.dim();
    let ancillas = StateVector::ground("A").tensor(&StateVector::ground("X"))?;
    ancillas
        .tensor(channel)?
        .apply(&hadamard(), &["A"])?
        .apply(&hadamard(), &["X"])?
        .apply_controlled(&[("A", 1)], &phase_rotation(PI, dim_b), &["B"])?
        .apply_controlled(&[("X", 1)], &phase_rotation(PI, dim_c), &["C"])
}

/// The four-partite state on (A, X, B, C) grown from `|g>_A |g>_X |ECS^{Phi+}>_BC`.
pub fn build_ghz(alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    entangle_ancillas(&ecs(EcsKind::PhiPlus, alpha, dim)?)
}

fn bell_pair(correlated: bool) -> StateVector {
    let h = C64::from(FRAC_1_SQRT_2);
    let z = C64::from(0.0);
    let amps = if correlated { [h, z, z, h] } else { [z, h, h, z] };
    StateVector::new(
        vec![crate::fock::ModeSpec::qubit("A"), crate::fock::ModeSpec::qubit("X")],
        Ket::from_row_slice(&amps),
    )
    .expect("two qubits")
}

/// `(|Phi+>_AX |ECS^{Phi+}> + |Psi+>_AX |ECS^{Psi+}>)/sqrt 2`, built from the
/// named states.
pub fn ghz_bell_form(alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    let phi = bell_pair(true).tensor(&ecs(EcsKind::PhiPlus, alpha, dim)?)?;
    let psi = bell_pair(false).tensor(&ecs(EcsKind::PsiPlus, alpha, dim)?)?;
    Ok(phi.add(&psi)?.scaled(C64::from(FRAC_1_SQRT_2)))
}

/// `|++>_AX u+_B u+_C + |-->_AX u-_B u-_C`, normalized, where `u+-` are the
/// unnormalized branch sums `|alpha> +- |-alpha>`.
pub fn ghz_cat_form(alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    let h = C64::from(FRAC_1_SQRT_2);
    let plus = StateVector::qubit("A", h, h).tensor(&StateVector::qubit("X", h, h))?;
    let minus = StateVector::qubit("A", h, -h).tensor(&StateVector::qubit("X", h, -h))?;
    let mut terms = Vec::with_capacity(2);
    for (q, parity) in [(plus, CatParity::Even), (minus, CatParity::Odd)] {
        let b = cat_superposition(parity, alpha, "B", dim)?;
        let c = cat_superposition(parity, alpha, "C", dim)?;
        terms.push(q.tensor(&b)?.tensor(&c)?);
    }
    terms[0].add(&terms[1])?.normalized()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliXRound {
    pub outcome_a: QubitOutcome,
    pub outcome_x: QubitOutcome,
    pub probability: f64,
    pub success: bool,
    /// Normalized state of (B, C) after the ancilla readout.
    pub post_channel: StateVector,
}

const ANCILLA_OUTCOMES: [(QubitOutcome, QubitOutcome); 4] = [
    (QubitOutcome::G, QubitOutcome::G),
    (QubitOutcome::G, QubitOutcome::E),
    (QubitOutcome::E, QubitOutcome::G),
    (QubitOutcome::E, QubitOutcome::E),
];

fn ancilla_bra(a: QubitOutcome, x: QubitOutcome) -> Result<StateVector> {
    StateVector::basis(
        vec![crate::fock::ModeSpec::qubit("A"), crate::fock::ModeSpec::qubit("X")],
        &[a.level(), x.level()],
    )
}

/// Exhaustive readout of A and X in `{g, e}`, in the order gg, ge, eg, ee.
pub fn ancilla_outcomes(state: &StateVector) -> Result<Vec<PauliXRound>> {
    let total = state.norm().powi(2);
    ANCILLA_OUTCOMES
        .iter()
        .map(|&(a, x)| {
            let post = state.contract(&ancilla_bra(a, x)?)?;
            let probability = post.norm().powi(2) / total;
            let post_channel = if probability > 0.0 { post.normalized()? } else { post };
            Ok(PauliXRound { outcome_a: a, outcome_x: x, probability, success: a != x, post_channel })
        })
        .collect()
}

/// Probability that A and X disagree.
pub fn success_probability(state: &StateVector) -> Result<f64> {
    Ok(ancilla_outcomes(state)?.iter().filter(|r| r.success).map(|r| r.probability).sum())
}

pub fn pauli_x_round<R: Rng + ?Sized>(state: &StateVector, rng: &mut R) -> Result<PauliXRound> {
    let mut outcomes = ancilla_outcomes(state)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut pick = outcomes.len() - 1;
    for (k, r) in outcomes.iter().enumerate() {
        acc += r.probability;
        if u < acc {
            pick = k;
            break;
        }
    }
    Ok(outcomes.swap_remove(pick))
}

pub fn pauli_x_round_seeded(state: &StateVector, seed: u64) -> Result<PauliXRound> {
    pauli_x_round(state, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliXRun {
    pub rounds: usize,
    pub channel: StateVector,
}

/// Re-entangles fresh ancillas with the channel and reads them out until the
/// outcomes differ, starting from `|ECS^{Phi+}>`.
pub fn pauli_x_until_success(alpha: CoherentAmplitude, dim: usize, max_rounds: usize, seed: u64) -> Result<PauliXRun> {
    if max_rounds == 0 {
        return Err(Error::OutOfRange("max_rounds must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut channel = ecs(EcsKind::PhiPlus, alpha, dim)?;
    for round in 1..=max_rounds {
        let r = pauli_x_round(&entangle_ancillas(&channel)?, &mut rng)?;
        if r.success {
            return Ok(PauliXRun { rounds: round, channel: r.post_channel });
        }
        channel = r.post_channel;
    }
    Err(Error::MaxRoundsExceeded { rounds: max_rounds })
}

/// Mean number of rounds over `trials` independent runs seeded
/// `seed, seed + 1, ...`. Runs that exhaust `max_rounds` are counted as errors.
pub fn mean_rounds(alpha: CoherentAmplitude, dim: usize, trials: usize, max_rounds: usize, seed: u64) -> Result<f64> {
    let rounds: Vec<usize> = (0..trials as u64)
        .into_par_iter()
        .map(|k| pauli_x_until_success(alpha, dim, max_rounds, seed.wrapping_add(k)).map(|r| r.rounds))
        .collect::<Result<_>>()?;
    Ok(rounds.iter().sum::<usize>() as f64 / trials as f64)
}
