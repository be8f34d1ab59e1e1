//! Dense Hilbert-space kernel for tensor products of two-level systems and
//! truncated bosonic modes.
//!
//! Amplitudes are stored row-major over the ordered mode list: the first mode
//! is the most significant index. Every operation returns a new value; nothing
//! here mutates shared state, so values can be handed to sweep workers freely.

use std::f64::consts::FRAC_1_SQRT_2;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Ket = DVector<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Qubit,
    Cavity,
}

/// One tensor factor: a qubit (always two levels) or a cavity truncated at
/// `dim - 1` photons.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeSpec {
    kind: ModeKind,
    dim: usize,
    label: String,
}

impl ModeSpec {
    pub fn qubit(label: impl Into<String>) -> Self {
        Self { kind: ModeKind::Qubit, dim: 2, label: label.into() }
    }

    pub fn cavity(label: impl Into<String>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidMode(format!("cavity dimension must be >= 2, got {dim}")));
        }
        Ok(Self { kind: ModeKind::Cavity, dim, label: label.into() })
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn with_label(&self, label: &str) -> Self {
        Self { label: label.to_string(), ..self.clone() }
    }
}

/// Dimensionless coherent-state amplitude alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitude(pub C64);

impl CoherentAmplitude {
    pub fn real(alpha: f64) -> Self {
        Self(C64::new(alpha, 0.0))
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    pub fn abs(&self) -> f64 {
        self.0.norm()
    }

    pub fn neg(&self) -> Self {
        Self(-self.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0 * factor)
    }

    /// `<alpha|-alpha> = exp(-2|alpha|^2)`, the overlap that controls every
    /// finite-amplitude correction in the protocol.
    pub fn overlap_with_negative(&self) -> f64 {
        (-2.0 * self.0.norm_sqr()).exp()
    }

    /// Smallest Fock dimension that keeps the Poisson tail below ~1e-10.
    pub fn required_dim(&self) -> usize {
        required_dim(self.abs())
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        let required = self.required_dim();
        if dim < required {
            return Err(Error::Truncation { alpha: self.abs(), dim, required });
        }
        Ok(())
    }
}

impl From<f64> for CoherentAmplitude {
    fn from(alpha: f64) -> Self {
        Self::real(alpha)
    }
}

impl From<C64> for CoherentAmplitude {
    fn from(alpha: C64) -> Self {
        Self(alpha)
    }
}

/// `ceil(|alpha|^2 + 7|alpha| + 10)`: mean plus roughly seven standard
/// deviations of the photon-number distribution.
pub fn required_dim(abs_alpha: f64) -> usize {
    (abs_alpha * abs_alpha + 7.0 * abs_alpha + 10.0).ceil() as usize
}

// ---------------------------------------------------------------------------
// index bookkeeping

#[derive(Debug, Clone)]
struct Layout {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Layout {
    fn new(modes: &[ModeSpec]) -> Self {
        let dims: Vec<usize> = modes.iter().map(|m| m.dim).collect();
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Self { dims, strides }
    }

    /// Linear offsets of every multi-index over `positions`, row-major in the
    /// given order.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let mut out = vec![0usize];
        for &p in positions {
            let mut next = Vec::with_capacity(out.len() * self.dims[p]);
            for &o in &out {
                for i in 0..self.dims[p] {
                    next.push(o + i * self.strides[p]);
                }
            }
            out = next;
        }
        out
    }

    fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.dims.len()).filter(|p| !positions.contains(p)).collect()
    }
}

fn positions_of(modes: &[ModeSpec], labels: &[&str]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(labels.len());
    for label in labels {
        let p = modes.iter().position(|m| m.label == *label).ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if out.contains(&p) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        out.push(p);
    }
    Ok(out)
}

fn check_unique(modes: &[ModeSpec]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].iter().any(|o| o.label == m.label) {
            return Err(Error::DuplicateLabel(m.label.clone()));
        }
    }
    Ok(())
}

fn total_dim(modes: &[ModeSpec]) -> usize {
    modes.iter().map(|m| m.dim).product()
}

/// Apply `op` in place to the sub-blocks of `buf` addressed by `sub` offsets,
/// one block per entry of `rest`.
fn apply_blocks(buf: &mut [C64], op: &Matrix, sub: &[usize], rest: &[usize]) {
    let n = sub.len();
    let mut x = Ket::zeros(n);
    for &r in rest {
        for (k, &s) in sub.iter().enumerate() {
            x[k] = buf[r + s];
        }
        let y = op * &x;
        for (k, &s) in sub.iter().enumerate() {
            buf[r + s] = y[k];
        }
    }
}

// ---------------------------------------------------------------------------
// pure states

/// A pure state over a labeled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    modes: Vec<ModeSpec>,
    amps: Ket,
}

impl StateVector {
    pub fn new(modes: Vec<ModeSpec>, amps: Ket) -> Result<Self> {
        check_unique(&modes)?;
        let expected = total_dim(&modes);
        if amps.len() != expected {
            return Err(Error::DimensionMismatch(format!("amplitude length {} but modes need {expected}", amps.len())));
        }
        Ok(Self { modes, amps })
    }

    /// Computational basis state `|levels>`.
    pub fn basis(modes: Vec<ModeSpec>, levels: &[usize]) -> Result<Self> {
        if levels.len() != modes.len() {
            return Err(Error::DimensionMismatch("one level per mode required".into()));
        }
        let layout = Layout::new(&modes);
        let mut idx = 0;
        for (k, (&l, m)) in levels.iter().zip(&modes).enumerate() {
            if l >= m.dim {
                return Err(Error::OutOfRange(format!("level {l} >= dim {} of `{}`", m.dim, m.label)));
            }
            idx += l * layout.strides[k];
        }
        let mut amps = Ket::zeros(total_dim(&modes));
        amps[idx] = ONE;
        Self::new(modes, amps)
    }

    pub fn qubit(label: &str, a: C64, b: C64) -> Self {
        Self { modes: vec![ModeSpec::qubit(label)], amps: Ket::from_vec(vec![a, b]) }
    }

    pub fn ground(label: &str) -> Self {
        Self::qubit(label, ONE, ZERO)
    }

    pub fn excited(label: &str) -> Self {
        Self::qubit(label, ZERO, ONE)
    }

    pub fn vacuum(label: &str, dim: usize) -> Result<Self> {
        Self::basis(vec![ModeSpec::cavity(label, dim)?], &[0])
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &Ket {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Ket {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn mode(&self, label: &str) -> Result<&ModeSpec> {
        self.modes.iter().find(|m| m.label == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn has_labels(&self, labels: &[&str]) -> bool {
        labels.iter().all(|l| self.modes.iter().any(|m| m.label == *l))
    }

    /// Rename a mode.
    pub fn relabel(mut self, from: &str, to: &str) -> Result<Self> {
        let p = positions_of(&self.modes, &[from])?[0];
        self.modes[p] = self.modes[p].with_label(to);
        check_unique(&self.modes)?;
        Ok(self)
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(Self { modes: self.modes.clone(), amps: self.amps.unscale(n) })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { modes: self.modes.clone(), amps: &self.amps * factor }
    }

    /// Sum of two states on identical modes.
    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.same_modes(other)?;
        Ok(Self { modes: self.modes.clone(), amps: &self.amps + &other.amps })
    }

    fn same_modes(&self, other: &StateVector) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch("states live on different modes".into()));
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.same_modes(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Tensor product `self (x) other`, modes concatenated.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        check_unique(&modes)?;
        Ok(Self { modes, amps: self.amps.kronecker(&other.amps) })
    }

    /// Apply `op`, which acts on the tensor product of `labels` in that order.
    pub fn apply(&self, op: &Matrix, labels: &[&str]) -> Result<Self> {
        self.apply_controlled(&[], op, labels)
    }

    /// Apply `op` on `targets` only in the subspace where every control mode
    /// sits at its given level.
    pub fn apply_controlled(&self, controls: &[(&str, usize)], op: &Matrix, targets: &[&str]) -> Result<Self> {
        let layout = Layout::new(&self.modes);
        let tpos = positions_of(&self.modes, targets)?;
        let control_labels: Vec<&str> = controls.iter().map(|c| c.0).collect();
        let cpos = positions_of(&self.modes, &control_labels)?;
        if cpos.iter().any(|p| tpos.contains(p)) {
            return Err(Error::DuplicateLabel("control and target overlap".into()));
        }
        let sub = layout.offsets(&tpos);
        if op.nrows() != sub.len() || op.ncols() != sub.len() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{} but target space has dim {}",
                op.nrows(),
                op.ncols(),
                sub.len()
            )));
        }
        let mut fixed: Vec<usize> = tpos.clone();
        fixed.extend(&cpos);
        let mut control_offset = 0;
        for (&p, &(label, level)) in cpos.iter().zip(controls) {
            if level >= layout.dims[p] {
                return Err(Error::OutOfRange(format!("control level {level} on `{label}`")));
            }
            control_offset += level * layout.strides[p];
        }
        let rest: Vec<usize> =
            layout.offsets(&layout.complement(&fixed)).into_iter().map(|o| o + control_offset).collect();
        let mut amps = self.amps.clone();
        apply_blocks(amps.as_mut_slice(), op, &sub, &rest);
        Ok(Self { modes: self.modes.clone(), amps })
    }

    /// Partial inner product with `bra` over the bra's modes; the result lives
    /// on the remaining modes and is not renormalized.
    pub fn contract(&self, bra: &StateVector) -> Result<Self> {
        let labels: Vec<&str> = bra.modes.iter().map(|m| m.label.as_str()).collect();
        let pos = positions_of(&self.modes, &labels)?;
        for (p, m) in pos.iter().zip(&bra.modes) {
            if self.modes[*p].dim != m.dim {
                return Err(Error::DimensionMismatch(format!("mode `{}` dims differ", m.label)));
            }
        }
        let layout = Layout::new(&self.modes);
        let sub = layout.offsets(&pos);
        let rest_pos = layout.complement(&pos);
        let rest = layout.offsets(&rest_pos);
        let amps = Ket::from_iterator(
            rest.len(),
            rest.iter().map(|&r| sub.iter().zip(bra.amps.iter()).map(|(&s, b)| b.conj() * self.amps[r + s]).sum()),
        );
        let modes = rest_pos.iter().map(|&p| self.modes[p].clone()).collect();
        Ok(Self { modes, amps })
    }

    /// Reduced density operator on `keep` (in the given order).
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let layout = Layout::new(&self.modes);
        let kpos = positions_of(&self.modes, keep)?;
        let ko = layout.offsets(&kpos);
        let to = layout.offsets(&layout.complement(&kpos));
        let m = Matrix::from_fn(ko.len(), to.len(), |i, j| self.amps[ko[i] + to[j]]);
        let modes = kpos.iter().map(|&p| self.modes[p].clone()).collect();
        DensityOperator::new(modes, &m * m.adjoint())
    }

    /// `<self| op |self>` with `op` acting on `labels`.
    pub fn expectation(&self, op: &Matrix, labels: &[&str]) -> Result<C64> {
        let applied = self.apply(op, labels)?;
        Ok(self.amps.dotc(&applied.amps))
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator { modes: self.modes.clone(), matrix: &self.amps * self.amps.adjoint() }
    }
}

/// `|<u|v>|^2` for two pure states on the same modes.
pub fn pure_fidelity(u: &StateVector, v: &StateVector) -> Result<f64> {
    Ok(u.inner(v)?.norm_sqr())
}

pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    u.inner(v)
}

/// Tensor product of several states, modes concatenated left to right.
pub fn tensor(parts: &[&StateVector]) -> Result<StateVector> {
    let (first, rest) = parts.split_first().ok_or_else(|| Error::DimensionMismatch("empty tensor product".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, p| acc.tensor(p))
}

/// Kronecker product of operators, leftmost most significant.
pub fn tensor_ops(parts: &[&Matrix]) -> Matrix {
    parts.iter().fold(Matrix::identity(1, 1), |acc, p| acc.kronecker(*p))
}

// ---------------------------------------------------------------------------
// mixed states

/// A density operator over a labeled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    modes: Vec<ModeSpec>,
    matrix: Matrix,
}

impl DensityOperator {
    pub fn new(modes: Vec<ModeSpec>, matrix: Matrix) -> Result<Self> {
        check_unique(&modes)?;
        let d = total_dim(&modes);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but modes need {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { modes, matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        psi.to_density()
    }

    /// `sum_i w_i |psi_i><psi_i|` with weights renormalized to sum 1.
    pub fn mixture(parts: &[(f64, &StateVector)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::DimensionMismatch("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|p| p.0).sum();
        if total <= 0.0 {
            return Err(Error::Degenerate("mixture weights sum to zero".into()));
        }
        let d = first.dim();
        let mut m = Matrix::zeros(d, d);
        for (w, psi) in parts {
            first.same_modes(psi)?;
            m += (&psi.amps * psi.amps.adjoint()) * C64::from(*w / total);
        }
        Self::new(first.modes.clone(), m)
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace().re;
        if t <= 1e-300 {
            return Err(Error::Degenerate("density operator has zero trace".into()));
        }
        Ok(Self { modes: self.modes.clone(), matrix: self.matrix.unscale(t) })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.eigenvalues().into_iter().filter(|&p| p > 1e-15).map(|p| -p * p.log2()).sum()
    }

    /// Largest deviation from Hermiticity, `max |rho - rho^dagger|`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let layout = Layout::new(&self.modes);
        let kpos = positions_of(&self.modes, keep)?;
        let ko = layout.offsets(&kpos);
        let to = layout.offsets(&layout.complement(&kpos));
        let m =
            Matrix::from_fn(ko.len(), ko.len(), |i, j| to.iter().map(|&t| self.matrix[(ko[i] + t, ko[j] + t)]).sum());
        let modes = kpos.iter().map(|&p| self.modes[p].clone()).collect();
        Self::new(modes, m)
    }

    /// `O rho O^dagger` with `op` acting on `labels`; not renormalized.
    pub fn conjugate_by(&self, op: &Matrix, labels: &[&str]) -> Result<Self> {
        let layout = Layout::new(&self.modes);
        let pos = positions_of(&self.modes, labels)?;
        let sub = layout.offsets(&pos);
        if op.nrows() != sub.len() || op.ncols() != sub.len() {
            return Err(Error::DimensionMismatch("operator does not match target modes".into()));
        }
        let rest = layout.offsets(&layout.complement(&pos));
        let d = self.dim();
        let mut m = self.matrix.clone();
        // columns: O M
        for c in 0..d {
            let mut col: Vec<C64> = m.column(c).iter().copied().collect();
            apply_blocks(&mut col, op, &sub, &rest);
            m.set_column(c, &Ket::from_vec(col));
        }
        // rows: (O M) O^dagger = (O (O M)^dagger)^dagger
        let mut t = m.adjoint();
        for c in 0..d {
            let mut col: Vec<C64> = t.column(c).iter().copied().collect();
            apply_blocks(&mut col, op, &sub, &rest);
            t.set_column(c, &Ket::from_vec(col));
        }
        Ok(Self { modes: self.modes.clone(), matrix: t.adjoint() })
    }

    /// `Tr[O rho]` with `op` acting on `labels`.
    pub fn expectation(&self, op: &Matrix, labels: &[&str]) -> Result<C64> {
        let reduced = self.partial_trace(labels)?;
        if op.nrows() != reduced.dim() || op.ncols() != reduced.dim() {
            return Err(Error::DimensionMismatch("operator does not match target modes".into()));
        }
        Ok((op * &reduced.matrix).trace())
    }

    /// `<psi| rho |psi>` for a pure state on the same modes.
    pub fn fidelity(&self, psi: &StateVector) -> Result<f64> {
        if self.modes != psi.modes {
            return Err(Error::DimensionMismatch("state and density operator modes differ".into()));
        }
        Ok(psi.amps.dotc(&(&self.matrix * &psi.amps)).re)
    }

    /// Zero-pads a single cavity mode to a larger cutoff.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        let mode = self.single_cavity()?;
        if dim < mode.dim {
            return Err(Error::DimensionMismatch("cannot pad to a smaller dimension".into()));
        }
        let mut m = Matrix::zeros(dim, dim);
        m.view_mut((0, 0), (mode.dim, mode.dim)).copy_from(&self.matrix);
        Self::new(vec![ModeSpec::cavity(mode.label.clone(), dim)?], m)
    }

    fn single_cavity(&self) -> Result<&ModeSpec> {
        match self.modes.as_slice() {
            [m] if m.kind == ModeKind::Cavity => Ok(m),
            _ => Err(Error::DimensionMismatch("expected a single cavity mode".into())),
        }
    }
}

pub fn partial_trace(rho: &DensityOperator, keep: &[&str]) -> Result<DensityOperator> {
    rho.partial_trace(keep)
}

/// `<psi| rho |psi>`.
pub fn fidelity(psi: &StateVector, rho: &DensityOperator) -> Result<f64> {
    rho.fidelity(psi)
}

// ---------------------------------------------------------------------------
// bosonic operators

pub fn annihilation(dim: usize) -> Matrix {
    let mut a = Matrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    a
}

pub fn number_operator(dim: usize) -> Matrix {
    Matrix::from_diagonal(&Ket::from_fn(dim, |n, _| C64::from(n as f64)))
}

/// Photon-number parity `(-1)^n`.
pub fn parity_operator(dim: usize) -> Matrix {
    Matrix::from_diagonal(&Ket::from_fn(dim, |n, _| C64::from(if n % 2 == 0 { 1.0 } else { -1.0 })))
}

/// `exp(i phi n)`.
pub fn phase_rotation(phi: f64, dim: usize) -> Matrix {
    Matrix::from_diagonal(&Ket::from_fn(dim, |n, _| C64::from_polar(1.0, phi * n as f64)))
}

/// Projector onto even (`true`) or odd photon numbers.
pub fn parity_projector(even: bool, dim: usize) -> Matrix {
    Matrix::from_diagonal(&Ket::from_fn(dim, |n, _| if (n % 2 == 0) == even { ONE } else { ZERO }))
}

/// Truncated coherent-state amplitudes `c_m = exp(-|a|^2/2) a^m / sqrt(m!)`,
/// renormalized over the kept levels.
pub fn coherent_ket(alpha: CoherentAmplitude, dim: usize) -> Result<Ket> {
    alpha.check(dim)?;
    let a = alpha.value();
    let mut c = Ket::zeros(dim);
    c[0] = C64::from((-0.5 * a.norm_sqr()).exp());
    for m in 1..dim {
        c[m] = c[m - 1] * a / (m as f64).sqrt();
    }
    let n = c.norm();
    Ok(c.unscale(n))
}

/// Coherent state `|alpha>` on a single cavity mode labeled `"a"`; rename it
/// with [`StateVector::relabel`].
pub fn coherent_state(alpha: CoherentAmplitude, dim: usize) -> Result<StateVector> {
    let amps = coherent_ket(alpha, dim)?;
    StateVector::new(vec![ModeSpec::cavity("a", dim)?], amps)
}

/// Displacement operators on a fixed truncated space.
///
/// `D(b) = exp(b a^dag - b* a)` is evaluated as `U_t exp(-i r H0) U_t^dag`
/// with `b = r e^{it}`, `H0 = i(a^dag - a)` diagonalized once and
/// `U_t = exp(i t n)`. The truncated generator is exponentiated exactly, so
/// the result is unitary to eigensolver precision.
#[derive(Debug, Clone)]
pub struct Displacer {
    dim: usize,
    vectors: Matrix,
    values: Vec<f64>,
}

impl Displacer {
    pub fn new(dim: usize) -> Self {
        let a = annihilation(dim);
        let h0 = (a.adjoint() - &a) * C64::i();
        let eig = SymmetricEigen::new(h0);
        Self { dim, vectors: eig.eigenvectors, values: eig.eigenvalues.iter().copied().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn displacement(&self, beta: C64) -> Matrix {
        let r = beta.norm();
        let t = beta.arg();
        let phases = Ket::from_iterator(self.dim, self.values.iter().map(|&l| C64::from_polar(1.0, -r * l)));
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        let d0 = scaled * self.vectors.adjoint();
        // U_t D0 U_t^dag, with U_t diagonal
        Matrix::from_fn(self.dim, self.dim, |m, n| d0[(m, n)] * C64::from_polar(1.0, t * (m as f64 - n as f64)))
    }
}

/// `D(alpha)` on one cavity of the given cutoff.
pub fn displacement(alpha: CoherentAmplitude, dim: usize) -> Result<Matrix> {
    alpha.check(dim)?;
    Ok(Displacer::new(dim).displacement(alpha.value()))
}

// ---------------------------------------------------------------------------
// qubit gates, basis order (|g>, |e>)

pub fn qubit_identity() -> Matrix {
    Matrix::identity(2, 2)
}

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ZERO, -C64::i(), C64::i(), ZERO])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> Matrix {
    let h = C64::from(FRAC_1_SQRT_2);
    Matrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// `(1 + i sigma_y)/sqrt 2`: `|g> -> |->`, `|e> -> |+>`.
pub fn ry_half_pi() -> Matrix {
    (qubit_identity() + pauli_y() * C64::i()) * C64::from(FRAC_1_SQRT_2)
}

/// Unitary taking `|g>` to `cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>`.
pub fn qubit_rotation(theta: f64, phi: f64) -> Matrix {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, phi);
    Matrix::from_row_slice(2, 2, &[C64::from(c), -e.conj() * s, e * s, C64::from(c)])
}

// ---------------------------------------------------------------------------
// Wigner function

/// Evaluates `W(beta) = (2/pi) Tr[D(beta) P D(-beta) rho]` for one cavity
/// mode. The state is zero-padded so displaced support stays inside the
/// truncated space.
#[derive(Debug, Clone)]
pub struct WignerEvaluator {
    rho: Matrix,
    displacer: Displacer,
    max_abs_beta: f64,
}

impl WignerEvaluator {
    pub fn new(rho: &DensityOperator, max_abs_beta: f64) -> Result<Self> {
        let mode = rho.single_cavity()?;
        let work = mode.dim + required_dim(max_abs_beta);
        let padded = rho.padded(work)?;
        Ok(Self { rho: padded.matrix, displacer: Displacer::new(work), max_abs_beta })
    }

    pub fn at(&self, beta: C64) -> Result<f64> {
        if beta.norm() > self.max_abs_beta + 1e-12 {
            return Err(Error::OutOfRange(format!(
                "|beta| = {} exceeds evaluator range {}",
                beta.norm(),
                self.max_abs_beta
            )));
        }
        let d = self.displacer.displacement(beta);
        // Tr[P D^dag rho D] = sum_n (-1)^n (D^dag rho D)_nn
        let rd = &self.rho * &d;
        let mut acc = ZERO;
        for n in 0..self.displacer.dim {
            let diag = d.column(n).dotc(&rd.column(n));
            acc += if n % 2 == 0 { diag } else { -diag };
        }
        Ok(2.0 / PI * acc.re)
    }
}

pub fn wigner_point(rho: &DensityOperator, beta: C64) -> Result<f64> {
    WignerEvaluator::new(rho, beta.norm())?.at(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn vacuum_is_coherent_zero() {
        let v = coherent_state(0.0.into(), 10).unwrap();
        assert_eq!(v.amplitudes()[0], ONE);
        assert!(v.amplitudes().iter().skip(1).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn coherent_overlap_and_mean_photon_number() {
        let p = coherent_state(1.0.into(), 40).unwrap();
        let m = coherent_state((-1.0).into(), 40).unwrap();
        assert!(close(p.inner(&m).unwrap().re, (-2.0f64).exp(), 1e-12));

        let two = coherent_state(2.0.into(), 40).unwrap();
        let n = two.expectation(&number_operator(40), &["a"]).unwrap();
        assert!(close(n.re, 4.0, 1e-9));
    }

    #[test]
    fn truncation_rule_is_enforced() {
        let err = coherent_state(2.0.into(), 27).unwrap_err();
        assert!(matches!(err, Error::Truncation { required: 28, .. }));
        assert!(coherent_state(2.0.into(), 28).is_ok());
        assert!(displacement(3.0.into(), 39).is_err());
    }

    #[test]
    fn displacement_identities() {
        let dim = 40;
        let d0 = displacement(0.0.into(), dim).unwrap();
        assert!((d0 - Matrix::identity(dim, dim)).norm() < 1e-12);

        let dp = displacement(1.5.into(), dim).unwrap();
        let dm = displacement((-1.5).into(), dim).unwrap();
        assert!((&dp * &dm - Matrix::identity(dim, dim)).norm() < 1e-8);
        assert!((dp.adjoint() * &dp - Matrix::identity(dim, dim)).norm() < 1e-10);
    }

    #[test]
    fn displacement_of_vacuum_and_of_minus_alpha() {
        let dim = 40;
        let vac = StateVector::vacuum("a", dim).unwrap();
        for alpha in [1.0, 2.0] {
            let coh = coherent_state(alpha.into(), dim).unwrap();
            let shifted = vac.apply(&displacement(alpha.into(), dim).unwrap(), &["a"]).unwrap();
            assert!(pure_fidelity(&shifted, &coh).unwrap() >= 1.0 - 1e-8);
        }
        let minus = coherent_state((-1.0).into(), dim).unwrap();
        let back = minus.apply(&displacement(1.0.into(), dim).unwrap(), &["a"]).unwrap();
        assert!(pure_fidelity(&back, &vac).unwrap() >= 1.0 - 1e-8);
    }

    #[test]
    fn complex_displacement_matches_coherent_state() {
        let dim = 40;
        let beta = C64::new(0.7, -1.1);
        let vac = StateVector::vacuum("a", dim).unwrap();
        let shifted = vac.apply(&displacement(beta.into(), dim).unwrap(), &["a"]).unwrap();
        let coh = coherent_state(beta.into(), dim).unwrap();
        assert!(pure_fidelity(&shifted, &coh).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn parity_expectations() {
        let vac = StateVector::vacuum("a", 10).unwrap();
        let pv = vac.apply(&parity_operator(10), &["a"]).unwrap();
        assert_eq!(pv, vac);

        let coh = coherent_state(1.0.into(), 40).unwrap();
        let p = coh.expectation(&parity_operator(40), &["a"]).unwrap();
        assert!(close(p.re, (-2.0f64).exp(), 1e-12));
    }

    #[test]
    fn tensor_then_trace_out_cavity() {
        let g = StateVector::ground("A");
        let v = StateVector::vacuum("B", 5).unwrap();
        let rho = g.tensor(&v).unwrap().to_density().partial_trace(&["A"]).unwrap();
        assert_eq!(rho.matrix(), &g.to_density().matrix().clone());
    }

    #[test]
    fn pure_and_density_reductions_agree() {
        let dim = 20;
        let a = coherent_state(0.8.into(), dim).unwrap().relabel("a", "B").unwrap();
        let q = StateVector::qubit("A", C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let psi = q.tensor(&a).unwrap();
        let ent = psi.apply_controlled(&[("A", 1)], &phase_rotation(PI, dim), &["B"]).unwrap();
        let r1 = ent.reduced(&["B"]).unwrap();
        let r2 = ent.to_density().partial_trace(&["B"]).unwrap();
        assert!((r1.matrix() - r2.matrix()).norm() < 1e-14);
    }

    #[test]
    fn fidelity_of_pure_with_itself() {
        let psi = coherent_state(1.2.into(), 30).unwrap();
        assert!(close(fidelity(&psi, &psi.to_density()).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn unknown_label_and_mismatch_errors() {
        let psi = StateVector::ground("A");
        assert!(matches!(psi.reduced(&["Z"]), Err(Error::UnknownLabel(_))));
        assert!(matches!(psi.apply(&Matrix::identity(3, 3), &["A"]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(psi.tensor(&psi), Err(Error::DuplicateLabel(_))));
        assert!(ModeSpec::cavity("B", 1).is_err());
    }

    #[test]
    fn contraction_removes_modes() {
        let g = StateVector::ground("A");
        let coh = coherent_state(1.0.into(), 20).unwrap().relabel("a", "B").unwrap();
        let psi = g.tensor(&coh).unwrap();
        let left = psi.contract(&StateVector::ground("A")).unwrap();
        assert_eq!(left.modes().len(), 1);
        assert!(close(pure_fidelity(&left, &coh).unwrap(), 1.0, 1e-12));
        let scalar = psi.contract(&psi).unwrap();
        assert!(scalar.modes().is_empty());
        assert!(close(scalar.amplitudes()[0].re, 1.0, 1e-12));
    }

    #[test]
    fn wigner_vacuum_origin_and_gaussian() {
        let vac = StateVector::vacuum("a", 10).unwrap().to_density();
        assert!(close(wigner_point(&vac, ZERO).unwrap(), 2.0 / PI, 1e-12));
        let b = C64::new(0.5, -0.3);
        let expected = 2.0 / PI * (-2.0 * b.norm_sqr()).exp();
        assert!(close(wigner_point(&vac, b).unwrap(), expected, 1e-10));
    }

    #[test]
    fn ry_half_pi_convention() {
        let r = ry_half_pi();
        let g = Ket::from_vec(vec![ONE, ZERO]);
        let out = &r * g;
        assert!(close(out[0].re, FRAC_1_SQRT_2, 1e-15));
        assert!(close(out[1].re, -FRAC_1_SQRT_2, 1e-15));
        let rot = qubit_rotation(PI / 3.0, 0.4);
        assert!((rot.adjoint() * &rot - qubit_identity()).norm() < 1e-14);
    }
}
