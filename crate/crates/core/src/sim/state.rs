//! Statevectors and density matrices over a little-endian qubit register.

use num_complex::Complex;
use rand::Rng;

use super::kernel::{self, Shape};
use super::matrix::Matrix;
use super::pauli::{PauliMasks, PauliString};
use crate::gates::durations;
use crate::{Error, Result, Scalar};

/// Widest density matrix a state may hold (4^14 amplitudes).
pub const DENSITY_WIDTH_CAP: usize = 14;
/// Widest statevector a state may hold.
pub const STATEVECTOR_WIDTH_CAP: usize = 26;

/// Probabilities below this are treated as impossible outcomes.
pub const RENORMALISATION_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Statevector,
    Density,
}

impl StateKind {
    pub fn cap(self) -> usize {
        match self {
            StateKind::Statevector => STATEVECTOR_WIDTH_CAP,
            StateKind::Density => DENSITY_WIDTH_CAP,
        }
    }

    fn name(self) -> &'static str {
        match self {
            StateKind::Statevector => "statevector",
            StateKind::Density => "density-matrix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    X,
    Z,
}

/// A unitary bound to its target qubits, validated once and reusable.
///
/// `targets[0]` is the least significant qubit of the matrix index.
#[derive(Debug, Clone)]
pub struct BoundUnitary<T> {
    targets: Vec<usize>,
    shape: Shape<T>,
    conj: Shape<T>,
}

impl<T: Scalar> BoundUnitary<T> {
    pub fn new(matrix: &Matrix<T>, targets: &[usize]) -> Result<Self> {
        let k = targets.len();
        if matrix.dim() != 1 << k {
            return Err(Error::DimensionMismatch {
                matrix: matrix.dim(),
                targets: k,
            });
        }
        for (i, &t) in targets.iter().enumerate() {
            if targets[..i].contains(&t) {
                return Err(Error::DuplicateTarget(t));
            }
        }
        let dev = matrix.unitarity_deviation();
        if dev > T::structural_tolerance() {
            return Err(Error::NotUnitary(dev.as_f64()));
        }
        let shape = Shape::classify(matrix.dim(), matrix.data());
        let conj = shape.conj();
        Ok(Self {
            targets: targets.to_vec(),
            shape,
            conj,
        })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }
}

/// A statevector or density matrix with per-qubit clocks in microseconds.
///
/// Density entries are stored row-major at index `(row << W) | col`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<T> {
    kind: StateKind,
    width: usize,
    data: Vec<Complex<T>>,
    clocks: Vec<f64>,
}

#[inline]
fn c0<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
fn re<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Inserts bit `b` at position `q` of `x`, shifting higher bits up.
#[inline]
fn insert_bit(x: usize, q: usize, b: usize) -> usize {
    let low = x & ((1 << q) - 1);
    ((x >> q) << (q + 1)) | (b << q) | low
}

impl<T: Scalar> QuantumState<T> {
    fn check_width(kind: StateKind, width: usize) -> Result<()> {
        if width > kind.cap() {
            return Err(Error::WidthCap {
                kind: kind.name(),
                width,
                cap: kind.cap(),
            });
        }
        Ok(())
    }

    /// `|0…0⟩` as the requested kind.
    pub fn zero(kind: StateKind, width: usize) -> Result<Self> {
        Self::check_width(kind, width)?;
        let len = match kind {
            StateKind::Statevector => 1 << width,
            StateKind::Density => 1 << (2 * width),
        };
        let mut data = vec![c0(); len];
        data[0] = re(T::one());
        Ok(Self {
            kind,
            width,
            data,
            clocks: vec![0.0; width],
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(kind: StateKind, width: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(kind, width)?;
        if index >= 1 << width {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} exceeds 2^{width}"
            )));
        }
        s.data[0] = c0();
        match kind {
            StateKind::Statevector => s.data[index] = re(T::one()),
            StateKind::Density => s.data[(index << width) | index] = re(T::one()),
        }
        Ok(s)
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let width = log2_exact(amplitudes.len())?;
        Self::check_width(StateKind::Statevector, width)?;
        let s = Self {
            kind: StateKind::Statevector,
            width,
            data: amplitudes,
            clocks: vec![0.0; width],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_density(matrix: &Matrix<T>) -> Result<Self> {
        let width = log2_exact(matrix.dim())?;
        Self::check_width(StateKind::Density, width)?;
        let s = Self {
            kind: StateKind::Density,
            width,
            data: matrix.data().to_vec(),
            clocks: vec![0.0; width],
        };
        s.validate()?;
        Ok(s)
    }

    /// Builds a state from raw storage without validation.
    pub fn from_raw(kind: StateKind, width: usize, data: Vec<Complex<T>>) -> Result<Self> {
        Self::check_width(kind, width)?;
        let expected = match kind {
            StateKind::Statevector => 1 << width,
            StateKind::Density => 1 << (2 * width),
        };
        if data.len() != expected {
            return Err(Error::InvalidState(format!(
                "{} entries for a {}-qubit {}",
                data.len(),
                width,
                kind.name()
            )));
        }
        Ok(Self {
            kind,
            width,
            data,
            clocks: vec![0.0; width],
        })
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn clocks(&self) -> &[f64] {
        &self.clocks
    }

    pub fn advance_clock(&mut self, q: usize, dt: f64) {
        self.clocks[q] += dt;
    }

    pub fn is_density(&self) -> bool {
        self.kind == StateKind::Density
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.width {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                width: self.width,
            });
        }
        Ok(())
    }

    fn require_density(&self) -> Result<()> {
        if self.kind != StateKind::Density {
            return Err(Error::WrongStateKind("density-matrix"));
        }
        Ok(())
    }

    /// Density entry `ρ[r, c]`.
    #[inline]
    pub fn rho(&self, r: usize, c: usize) -> Complex<T> {
        self.data[(r << self.width) | c]
    }

    /// Norm (statevector) or trace (density), as a real number.
    pub fn trace(&self) -> T {
        match self.kind {
            StateKind::Statevector => self.data.iter().map(|a| a.norm_sqr()).sum(),
            StateKind::Density => (0..1usize << self.width).map(|i| self.rho(i, i).re).sum(),
        }
    }

    /// `Tr ρ²`, or 1 for a normalised statevector.
    pub fn purity(&self) -> T {
        match self.kind {
            StateKind::Statevector => {
                let n = self.trace();
                n * n
            }
            StateKind::Density => self.data.iter().map(|a| a.norm_sqr()).sum(),
        }
    }

    /// Checks normalisation, hermiticity and positivity within tolerance.
    pub fn validate(&self) -> Result<()> {
        let tol = T::structural_tolerance();
        let tr = self.trace();
        if (tr - T::one()).abs() > tol {
            return Err(Error::InvalidState(format!("trace/norm is {tr}")));
        }
        if self.kind == StateKind::Statevector {
            return Ok(());
        }
        let d = 1usize << self.width;
        for r in 0..d {
            for c in r..d {
                if (self.rho(r, c) - self.rho(c, r).conj()).norm() > tol {
                    return Err(Error::InvalidState(format!("not Hermitian at ({r}, {c})")));
                }
            }
        }
        let min = super::linalg::hermitian_eigen(&self.density_matrix())
            .values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -T::eigenvalue_slack().as_f64() {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Full density matrix, building `|ψ⟩⟨ψ|` for statevectors.
    pub fn density_matrix(&self) -> Matrix<T> {
        let d = 1usize << self.width;
        match self.kind {
            StateKind::Density => Matrix::from_rows(d, self.data.clone()),
            StateKind::Statevector => {
                let mut m = Matrix::zeros(d);
                for r in 0..d {
                    for c in 0..d {
                        m[(r, c)] = self.data[r] * self.data[c].conj();
                    }
                }
                m
            }
        }
    }

    pub fn to_density(&self) -> Result<Self> {
        Self::check_width(StateKind::Density, self.width)?;
        Ok(Self {
            kind: StateKind::Density,
            width: self.width,
            data: self.density_matrix().data().to_vec(),
            clocks: self.clocks.clone(),
        })
    }

    /// `self ⊗ other`, with `other` occupying the new high qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind {
            return Err(Error::WrongStateKind(self.kind.name()));
        }
        let w = self.width + other.width;
        Self::check_width(self.kind, w)?;
        let data = match self.kind {
            StateKind::Statevector => {
                let mut v = Vec::with_capacity(1 << w);
                for b in &other.data {
                    for a in &self.data {
                        v.push(*a * *b);
                    }
                }
                v
            }
            StateKind::Density => {
                let (w1, d1, d2) = (self.width, 1usize << self.width, 1usize << other.width);
                let mut v = vec![c0(); 1 << (2 * w)];
                for r2 in 0..d2 {
                    for c2 in 0..d2 {
                        let b = other.rho(r2, c2);
                        if b.re == T::zero() && b.im == T::zero() {
                            continue;
                        }
                        for r1 in 0..d1 {
                            let row = ((r2 << w1) | r1) << w;
                            for c1 in 0..d1 {
                                v[row | (c2 << w1) | c1] = self.rho(r1, c1) * b;
                            }
                        }
                    }
                }
                v
            }
        };
        let mut clocks = self.clocks.clone();
        clocks.extend_from_slice(&other.clocks);
        Ok(Self {
            kind: self.kind,
            width: w,
            data,
            clocks,
        })
    }

    /// Applies `matrix` to `targets` after validating both.
    pub fn apply_unitary(&mut self, matrix: &Matrix<T>, targets: &[usize]) -> Result<()> {
        let u = BoundUnitary::new(matrix, targets)?;
        self.apply_bound(&u)
    }

    pub fn apply_bound(&mut self, u: &BoundUnitary<T>) -> Result<()> {
        for &t in &u.targets {
            self.check_qubit(t)?;
        }
        match self.kind {
            StateKind::Statevector => kernel::apply(&mut self.data, &u.targets, &u.shape),
            StateKind::Density => {
                let rows: Vec<usize> = u.targets.iter().map(|t| t + self.width).collect();
                kernel::apply(&mut self.data, &rows, &u.shape);
                kernel::apply(&mut self.data, &u.targets, &u.conj);
            }
        }
        Ok(())
    }

    /// Applies the Pauli string as an operator (its coefficient is ignored).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: p.width(),
            });
        }
        self.apply_masks(&p.masks());
        Ok(())
    }

    pub(crate) fn apply_masks(&mut self, m: &PauliMasks) {
        match self.kind {
            StateKind::Statevector => {
                if m.x_mask == 0 {
                    for (x, a) in self.data.iter_mut().enumerate() {
                        *a *= m.phase::<T>(x);
                    }
                } else {
                    let hi = 1usize << (usize::BITS - 1 - m.x_mask.leading_zeros());
                    for x in 0..self.data.len() {
                        if x & hi == 0 {
                            let y = x ^ m.x_mask;
                            let (ax, ay) = (self.data[x], self.data[y]);
                            self.data[y] = m.phase::<T>(x) * ax;
                            self.data[x] = m.phase::<T>(y) * ay;
                        }
                    }
                }
            }
            StateKind::Density => {
                let w = self.width;
                let mut out = vec![c0(); self.data.len()];
                let d = 1usize << w;
                for r in 0..d {
                    let pr = m.phase::<T>(r);
                    for c in 0..d {
                        out[((r ^ m.x_mask) << w) | (c ^ m.x_mask)] =
                            pr * m.phase::<T>(c).conj() * self.data[(r << w) | c];
                    }
                }
                self.data = out;
            }
        }
    }

    /// `ρ → Σ_k p_k P_k ρ P_k`; density states only.
    pub fn apply_pauli_channel(&mut self, terms: &[(f64, PauliString)]) -> Result<()> {
        self.require_density()?;
        let mut total = 0.0;
        for (p, s) in terms {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidProbability(*p));
            }
            if s.width() != self.width {
                return Err(Error::WidthMismatch {
                    expected: self.width,
                    found: s.width(),
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::ProbabilitiesNotNormalised(total));
        }
        let w = self.width;
        let d = 1usize << w;
        let mut out = vec![c0(); self.data.len()];
        for (p, s) in terms {
            if *p == 0.0 {
                continue;
            }
            let m = s.masks();
            let pt = T::of(*p);
            for r in 0..d {
                let rp = r ^ m.x_mask;
                let pr = m.phase::<T>(rp) * pt;
                for c in 0..d {
                    let cp = c ^ m.x_mask;
                    out[(r << w) | c] += pr * m.phase::<T>(cp).conj() * self.data[(rp << w) | cp];
                }
            }
        }
        self.data = out;
        Ok(())
    }

    /// Single-qubit Pauli channel with weights `[pI, pX, pY, pZ]`.
    pub fn pauli_channel_1q(&mut self, q: usize, p: [f64; 4]) -> Result<()> {
        self.require_density()?;
        self.check_qubit(q)?;
        let [pi, px, py, pz] = p.map(T::of);
        let (aa, ad) = (pi + pz, px + py);
        let (bb, bc) = (pi - pz, px - py);
        let colbit = 1usize << q;
        let rowbit = 1usize << (q + self.width);
        let data = &mut self.data;
        kernel::for_each_base(data.len(), rowbit | colbit, |b| {
            let a = data[b];
            let bv = data[b | colbit];
            let c = data[b | rowbit];
            let d = data[b | rowbit | colbit];
            data[b] = a * aa + d * ad;
            data[b | rowbit | colbit] = d * aa + a * ad;
            data[b | colbit] = bv * bb + c * bc;
            data[b | rowbit] = c * bb + bv * bc;
        });
        Ok(())
    }

    /// Single-qubit depolarising: each of X, Y, Z with probability `λ/3`.
    pub fn depolarize_1q(&mut self, q: usize, lambda: f64) -> Result<()> {
        check_probability(lambda)?;
        let t = lambda / 3.0;
        self.pauli_channel_1q(q, [1.0 - lambda, t, t, t])
    }

    /// Applies Z with probability `λ`.
    pub fn dephase(&mut self, q: usize, lambda: f64) -> Result<()> {
        check_probability(lambda)?;
        self.pauli_channel_1q(q, [1.0 - lambda, 0.0, 0.0, lambda])
    }

    /// Applies X with probability `λ`.
    pub fn bit_flip(&mut self, q: usize, lambda: f64) -> Result<()> {
        check_probability(lambda)?;
        self.pauli_channel_1q(q, [1.0 - lambda, lambda, 0.0, 0.0])
    }

    /// Two-qubit depolarising: each of the 15 non-identity Paulis with `λ/15`.
    pub fn depolarize_2q(&mut self, q1: usize, q2: usize, lambda: f64) -> Result<()> {
        check_probability(lambda)?;
        self.require_density()?;
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::DuplicateTarget(q1));
        }
        let w = self.width;
        let keep = T::of(1.0 - 16.0 * lambda / 15.0);
        let mix = T::of(16.0 * lambda / 15.0 / 4.0);
        let cols = kernel::offsets(&[q1, q2]);
        let rows = kernel::offsets(&[q1 + w, q2 + w]);
        let mask = cols[3] | rows[3];
        let data = &mut self.data;
        kernel::for_each_base(data.len(), mask, |b| {
            let mut t = c0::<T>();
            for s in 0..4 {
                t += data[b | rows[s] | cols[s]];
            }
            for r in 0..4 {
                for c in 0..4 {
                    let i = b | rows[r] | cols[c];
                    data[i] *= keep;
                    if r == c {
                        data[i] += t * mix;
                    }
                }
            }
        });
        Ok(())
    }

    /// Probability of reading 1 when measuring qubit `q` in the Z basis.
    pub fn prob_one(&self, q: usize) -> Result<T> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        Ok(match self.kind {
            StateKind::Statevector => self
                .data
                .iter()
                .enumerate()
                .filter(|(x, _)| x & bit != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum(),
            StateKind::Density => (0..1usize << self.width)
                .filter(|x| x & bit != 0)
                .map(|x| self.rho(x, x).re)
                .sum(),
        })
    }

    /// Projects qubit `q` onto Z outcome `bit` and renormalises.
    pub fn collapse(&mut self, q: usize, bit: u8) -> Result<()> {
        let p1 = self.prob_one(q)?.as_f64();
        let p = if bit == 1 { p1 } else { 1.0 - p1 };
        if p < RENORMALISATION_FLOOR {
            return Err(Error::CorruptedState);
        }
        let want = (bit as usize) << q;
        let qb = 1usize << q;
        match self.kind {
            StateKind::Statevector => {
                let s = T::of(1.0 / p.sqrt());
                for (x, a) in self.data.iter_mut().enumerate() {
                    *a = if x & qb == want { *a * s } else { c0() };
                }
            }
            StateKind::Density => {
                let s = T::of(1.0 / p);
                let w = self.width;
                let mask = (1usize << w) - 1;
                for (i, a) in self.data.iter_mut().enumerate() {
                    let (r, c) = (i >> w, i & mask);
                    *a = if r & qb == want && c & qb == want {
                        *a * s
                    } else {
                        c0()
                    };
                }
            }
        }
        Ok(())
    }

    /// Samples a measurement of `q`, collapses the state and advances the
    /// qubit clock by the detection time.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) -> Result<u8> {
        self.check_qubit(q)?;
        let h = super::hadamard::<T>();
        if basis == Basis::X {
            self.apply_unitary(&h, &[q])?;
        }
        let p1 = self.prob_one(q)?.as_f64();
        let p0 = 1.0 - p1;
        if p1 < RENORMALISATION_FLOOR && p0 < RENORMALISATION_FLOOR {
            return Err(Error::CorruptedState);
        }
        let bit = u8::from(rng.random::<f64>() < p1);
        self.collapse(q, bit)?;
        if basis == Basis::X {
            self.apply_unitary(&h, &[q])?;
        }
        self.clocks[q] += durations::DETECTION;
        Ok(bit)
    }

    /// Returns `q` to `|0⟩` and advances its clock by the preparation time.
    ///
    /// Density states use the non-selective reset channel; statevectors
    /// measure and flip.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        self.check_qubit(q)?;
        match self.kind {
            StateKind::Statevector => {
                let bit = self.measure(q, Basis::Z, rng)?;
                self.clocks[q] -= durations::DETECTION;
                if bit == 1 {
                    self.apply_masks(&PauliString::single(self.width, q, super::Pauli::X).masks());
                }
            }
            StateKind::Density => {
                let w = self.width;
                let qb = 1usize << q;
                let (rb, cb) = (qb << w, qb);
                let data = &mut self.data;
                kernel::for_each_base(data.len(), rb | cb, |b| {
                    let moved = data[b | rb | cb];
                    data[b] += moved;
                    data[b | rb | cb] = c0();
                    data[b | rb] = c0();
                    data[b | cb] = c0();
                });
            }
        }
        self.clocks[q] += durations::MID_CIRCUIT_PREP;
        Ok(())
    }

    /// Removes qubit `q`: partial trace for density states, sampled
    /// collapse for statevectors. Higher qubits shift down by one.
    pub fn discard<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        self.check_qubit(q)?;
        let w = self.width;
        match self.kind {
            StateKind::Statevector => {
                let p1 = self.prob_one(q)?.as_f64();
                let bit = usize::from(rng.random::<f64>() < p1);
                self.collapse(q, bit as u8)?;
                self.data = (0..1usize << (w - 1))
                    .map(|x| self.data[insert_bit(x, q, bit)])
                    .collect();
            }
            StateKind::Density => {
                let d = 1usize << (w - 1);
                let mut out = Vec::with_capacity(d * d);
                for r in 0..d {
                    let (r0, r1) = (insert_bit(r, q, 0), insert_bit(r, q, 1));
                    for c in 0..d {
                        let (c0_, c1) = (insert_bit(c, q, 0), insert_bit(c, q, 1));
                        out.push(self.rho(r0, c0_) + self.rho(r1, c1));
                    }
                }
                self.data = out;
            }
        }
        self.clocks.remove(q);
        self.width -= 1;
        Ok(())
    }

    /// Reduced density matrix on `keep`, in the listed order.
    pub fn reduced(&self, keep: &[usize]) -> Result<Matrix<T>> {
        for &q in keep {
            self.check_qubit(q)?;
        }
        let full = self.density_matrix();
        let w = self.width;
        let others: Vec<usize> = (0..w).filter(|q| !keep.contains(q)).collect();
        let ko = kernel::offsets(keep);
        let oo = kernel::offsets(&others);
        let d = ko.len();
        let mut m = Matrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                let mut acc = c0();
                for &e in &oo {
                    acc += full[(ko[r] | e, ko[c] | e)];
                }
                m[(r, c)] = acc;
            }
        }
        Ok(m)
    }

    /// `⟨P⟩` for one Pauli string, ignoring its coefficient.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<T> {
        if p.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: p.width(),
            });
        }
        Ok(self.masks_expectation(&p.masks()))
    }

    pub(crate) fn masks_expectation(&self, m: &PauliMasks) -> T {
        let mut acc = c0::<T>();
        match self.kind {
            StateKind::Statevector => {
                for (x, a) in self.data.iter().enumerate() {
                    acc += self.data[x ^ m.x_mask].conj() * m.phase::<T>(x) * a;
                }
            }
            StateKind::Density => {
                for x in 0..1usize << self.width {
                    acc += m.phase::<T>(x) * self.rho(x, x ^ m.x_mask);
                }
            }
        }
        acc.re
    }

    /// `Σ_i c_i ⟨σ_i⟩`.
    pub fn expectation(&self, obs: &[PauliString]) -> Result<T> {
        let mut acc = T::zero();
        for p in obs {
            acc += T::of(p.coefficient()) * self.pauli_expectation(p)?;
        }
        Ok(acc)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidState(format!("{n} is not a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}
