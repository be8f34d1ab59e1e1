//! Named states of the hybrid protocol: entangled coherent states (ECS),
//! Schrodinger cats, hybrid qubit-cavity Bell states, CV qubits encoded on
//! `{|alpha>, |-alpha>}` and the circuit that prepares an ECS from vacuum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coherent_ket, pauli_x, ry_half_pi, CoherentAmplitude, Displacer, Ket, ModeSpec, StateVector, C64};

/// Logical qubit `N (a|alpha> + b|-alpha>)` on the non-orthogonal coherent pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvQubit {
    a: C64,
    b: C64,
    alpha: CoherentAmplitude,
    norm_const: f64,
}

impl CvQubit {
    pub fn new(a: C64, b: C64, alpha: CoherentAmplitude) -> Result<Self> {
        let overlap = alpha.overlap_with_negative();
        let sq = a.norm_sqr() + b.norm_sqr() + 2.0 * (b.conj() * a).re * overlap;
        if sq <= 1e-300 {
            return Err(Error::Degenerate(format!("a|alpha> + b|-alpha> vanishes (a={a}, b={b})")));
        }
        Ok(Self { a, b, alpha, norm_const: 1.0 / sq.sqrt() })
    }

    /// Rescales `(a, b)` so that `|a|^2 + |b|^2 = 1`.
    pub fn unit(a: C64, b: C64, alpha: CoherentAmplitude) -> Result<Self> {
        let s = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if s <= 1e-300 {
            return Err(Error::Degenerate("zero coefficients".into()));
        }
        Self::new(a / s, b / s, alpha)
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn alpha(&self) -> CoherentAmplitude {
        self.alpha
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// `(a, b) -> (b, a)`.
    pub fn pseudo_x(&self) -> Self {
        Self::new(self.b, self.a, self.alpha).expect("swap preserves the norm")
    }

    /// `(a, b) -> (a, -b)`.
    pub fn pseudo_z(&self) -> Self {
        let flipped = -self.b;
        let overlap = self.alpha.overlap_with_negative();
        let sq = self.a.norm_sqr() + flipped.norm_sqr() + 2.0 * (flipped.conj() * self.a).re * overlap;
        Self { a: self.a, b: flipped, alpha: self.alpha, norm_const: 1.0 / sq.sqrt() }
    }

    /// Inner product with another CV qubit of the same amplitude, using the
    /// analytic coherent-state Gram matrix.
    pub fn overlap(&self, other: &CvQubit) -> C64 {
        let e = self.alpha.overlap_with_negative();
        let raw =
            self.a.conj() * other.a + self.b.conj() * other.b + (self.a.conj() * other.b + self.b.conj() * other.a) * e;
        raw * self.norm_const * other.norm_const
    }

    /// The state in a truncated cavity, renormalized numerically.
    pub fn materialize(&self, label: &str, dim: usize) -> Result<StateVector> {
        let p = coherent_ket(self.alpha, dim)?;
        let m = coherent_ket(self.alpha.neg(), dim)?;
        let amps = p * self.a + m * self.b;
        StateVector::new(vec![ModeSpec::cavity(label, dim)?], amps)?.normalized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EcsKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl EcsKind {
    pub const ALL: [EcsKind; 4] = [EcsKind::PhiPlus, EcsKind::PhiMinus, EcsKind::PsiPlus, EcsKind::PsiMinus];

    fn sign(self) -> f64 {
        match self {
            EcsKind::PhiPlus | EcsKind::PsiPlus => 1.0,
            EcsKind::PhiMinus | EcsKind::PsiMinus => -1.0,
        }
    }

    fn correlated(self) -> bool {
        matches!(self, EcsKind::PhiPlus | EcsKind::PhiMinus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HybridBellKind {
    PhiPlusHE,
    PhiMinusHE,
    PsiPlusHE,
    PsiMinusHE,
}

impl HybridBellKind {
    pub const ALL: [HybridBellKind; 4] =
        [HybridBellKind::PhiPlusHE, HybridBellKind::PhiMinusHE, HybridBellKind::PsiPlusHE, HybridBellKind::PsiMinusHE];
}

/// Even (`+`) or odd (`-`) cat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatParity {
    Even,
    Odd,
}

impl CatParity {
    fn sign(self) -> f64 {
        match self {
            CatParity::Even => 1.0,
            CatParity::Odd => -1.0,
        }
    }
}

/// `N^pm = 1/sqrt(2(1 pm exp(-4|alpha|^2)))`.
pub fn ecs_normalization(kind: EcsKind, alpha: CoherentAmplitude) -> f64 {
    let e = (-4.0 * alpha.value().norm_sqr()).exp();
    1.0 / (2.0 * (1.0 + kind.sign() * e)).sqrt()
}

/// Two-mode ECS on cavities `B` and `C`.
pub fn ecs(kind: EcsKind, alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    let p = coherent_ket(alpha, dim)?;
    let m = coherent_ket(alpha.neg(), dim)?;
    let n = ecs_normalization(kind, alpha);
    if !n.is_finite() {
        return Err(Error::Degenerate(format!("{kind:?} vanishes at alpha = 0")));
    }
    let (first, second) =
        if kind.correlated() { (p.kronecker(&p), m.kronecker(&m)) } else { (p.kronecker(&m), m.kronecker(&p)) };
    let amps = (first + second * C64::from(kind.sign())) * C64::from(n);
    let modes = vec![ModeSpec::cavity("B", dim)?, ModeSpec::cavity("C", dim)?];
    StateVector::new(modes, amps)?.normalized()
}

/// Unnormalized branch sum `|alpha> +- |-alpha>` on a cavity labeled `label`.
pub fn cat_superposition(parity: CatParity, alpha: CoherentAmplitude, label: &str, dim: usize) -> Result<StateVector> {
    let p = coherent_ket(alpha, dim)?;
    let m = coherent_ket(alpha.neg(), dim)?;
    StateVector::new(vec![ModeSpec::cavity(label, dim)?], p + m * C64::from(parity.sign()))
}

/// Normalized even or odd Schrodinger cat on a cavity labeled `"a"`.
pub fn scs(parity: CatParity, alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    cat_superposition(parity, alpha, "a", dim)?.normalized()
}

/// Hybrid qubit-cavity Bell state on modes `A` (qubit) and `B` (cavity).
pub fn hybrid_bell(kind: HybridBellKind, alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    let p = coherent_ket(alpha, dim)?;
    let m = coherent_ket(alpha.neg(), dim)?;
    let (on_g, on_e, sign) = match kind {
        HybridBellKind::PhiPlusHE => (&p, &m, 1.0),
        HybridBellKind::PhiMinusHE => (&p, &m, -1.0),
        HybridBellKind::PsiPlusHE => (&m, &p, 1.0),
        HybridBellKind::PsiMinusHE => (&m, &p, -1.0),
    };
    let g = Ket::from_vec(vec![C64::from(1.0), C64::from(0.0)]);
    let e = Ket::from_vec(vec![C64::from(0.0), C64::from(1.0)]);
    let amps = (g.kronecker(on_g) + e.kronecker(on_e) * C64::from(sign)) * C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let modes = vec![ModeSpec::qubit("A"), ModeSpec::cavity("B", dim)?];
    StateVector::new(modes, amps)?.normalized()
}

pub fn pseudo_x(q: &CvQubit) -> CvQubit {
    q.pseudo_x()
}

pub fn pseudo_z(q: &CvQubit) -> CvQubit {
    q.pseudo_z()
}

/// Runs the ECS preparation circuit on `|g>_M |0>_B |0>_C`:
///
/// 1. `(1 - i sigma_y)/sqrt 2` on M, giving `|+>_M`;
/// 2. `D(2 alpha) (x) D(2 alpha)` on B, C conditioned on `|g>_M`;
/// 3. `X_M` conditioned on the joint vacuum `|00>_BC`;
/// 4. `D(-alpha) (x) D(-alpha)` on B, C.
///
/// Returns the full `(M, B, C)` state. For large alpha the cavities end in
/// the even ECS with M left near `|g>`.
pub fn create_ecs_circuit(alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    alpha.scale(2.0).check(dim)?;
    let displacer = Displacer::new(dim);
    let d2 = displacer.displacement(alpha.value() * 2.0);
    let dm = displacer.displacement(-alpha.value());

    let start = StateVector::basis(
        vec![ModeSpec::qubit("M"), ModeSpec::cavity("B", dim)?, ModeSpec::cavity("C", dim)?],
        &[0, 0, 0],
    )?;
    let prepared = start.apply(&ry_half_pi().adjoint(), &["M"])?;
    let displaced = prepared.apply_controlled(&[("M", 0)], &d2, &["B"])?.apply_controlled(&[("M", 0)], &d2, &["C"])?;
    let flipped = displaced.apply_controlled(&[("B", 0), ("C", 0)], &pauli_x(), &["M"])?;
    flipped.apply(&dm, &["B"])?.apply(&dm, &["C"])
}
