//! Execution of noisy VD circuits on a factored register.
//!
//! The register is a list of independent factors. An operation merges the
//! factors it touches; a qubit is traced out after its last use, so the
//! simulated width follows the live entanglement rather than the circuit.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::circuit::{ArtificialGate, NoiseChannel, Op, TimedCircuit};
use crate::sim::{self, Matrix, Pauli, PauliString, StateKind};
use crate::{Error, Mat, Result, State};

/// A sampled Pauli error: `(qubit, pauli)` pairs.
pub(crate) type PauliError = Vec<(usize, Pauli)>;

#[derive(Debug, Clone)]
pub(crate) enum Instr {
    Unitary {
        qubits: Vec<usize>,
        matrix: Mat,
    },
    Channel(NoiseChannel),
    Prepare {
        register: Vec<usize>,
        copy: Arc<TimedCircuit>,
        flip: f64,
    },
    Ghz(Vec<usize>),
    /// Replaces the qubit by a fresh |0⟩.
    Fresh(usize),
    Release(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub width: usize,
    pub instrs: Vec<Instr>,
}

impl Program {
    /// Indices of `Prepare` instructions, in order.
    pub fn prepares(&self) -> impl Iterator<Item = (&Arc<TimedCircuit>, f64)> {
        self.instrs.iter().filter_map(|i| match i {
            Instr::Prepare { copy, flip, .. } => Some((copy, *flip)),
            _ => None,
        })
    }
}

fn instr_qubits(i: &Instr) -> Vec<usize> {
    match i {
        Instr::Unitary { qubits, .. } => qubits.clone(),
        Instr::Channel(c) => c.qubits(),
        Instr::Prepare { register, .. } => register.clone(),
        Instr::Ghz(q) => q.clone(),
        Instr::Fresh(q) | Instr::Release(q) => vec![*q],
    }
}

/// Lowers a noisy timed circuit. Measurements become bit-flip channels
/// (deferred measurement) and classical feedback becomes controlled Paulis.
/// Qubits outside `keep` are released after their last use.
pub(crate) fn compile(circuit: &TimedCircuit, keep: &BTreeSet<usize>) -> Program {
    let mut instrs = Vec::with_capacity(circuit.len());
    for e in circuit.events() {
        match &e.op {
            Op::Gate(g) => instrs.push(Instr::Unitary {
                qubits: g.targets().to_vec(),
                matrix: g.matrix(),
            }),
            Op::Artificial(ArtificialGate::Toffoli { c1, c2, target }) => {
                instrs.push(Instr::Unitary {
                    qubits: vec![*c1, *c2, *target],
                    matrix: sim::toffoli(),
                })
            }
            Op::Artificial(ArtificialGate::Cnot { control, target }) => {
                instrs.push(Instr::Unitary {
                    qubits: vec![*control, *target],
                    matrix: sim::controlled(&sim::pauli_matrix(Pauli::X)),
                })
            }
            Op::Channel(c) => {
                if c.probability() > 0.0 {
                    instrs.push(Instr::Channel(c.clone()));
                }
            }
            Op::Measure { qubit, flip, .. } => {
                if *flip > 0.0 {
                    instrs.push(Instr::Channel(NoiseChannel::BitFlip {
                        qubit: *qubit,
                        p: *flip,
                    }));
                }
            }
            Op::Reset { qubit } => instrs.push(Instr::Fresh(*qubit)),
            Op::PrepareCopy {
                register,
                circuit,
                flip,
                ..
            } => instrs.push(Instr::Prepare {
                register: register.clone(),
                copy: circuit.clone(),
                flip: *flip,
            }),
            Op::GhzPrep { qubits } => instrs.push(Instr::Ghz(qubits.clone())),
            Op::Feedback {
                controls,
                pauli,
                target,
            } => {
                // P^(c1 ⊕ c2 ⊕ …) = P^c1 P^c2 …
                for &c in controls {
                    instrs.push(Instr::Unitary {
                        qubits: vec![c, *target],
                        matrix: sim::controlled(&sim::pauli_matrix(*pauli)),
                    });
                }
            }
            Op::FoldedLink { .. } | Op::Barrier { .. } => {}
        }
    }
    let mut last = vec![None; circuit.width()];
    for (i, ins) in instrs.iter().enumerate() {
        for q in instr_qubits(ins) {
            last[q] = Some(i);
        }
    }
    let mut releases: Vec<Vec<usize>> = vec![Vec::new(); instrs.len()];
    for (q, l) in last.iter().enumerate() {
        if let (Some(i), false) = (l, keep.contains(&q)) {
            releases[*i].push(q);
        }
    }
    let mut out = Vec::with_capacity(instrs.len() + circuit.width());
    for (ins, rel) in instrs.into_iter().zip(releases) {
        out.push(ins);
        out.extend(rel.into_iter().map(Instr::Release));
    }
    Program {
        width: circuit.width(),
        instrs: out,
    }
}

/// How channels are treated during a run.
#[derive(Clone, Copy)]
pub(crate) enum Channels<'a> {
    /// Applied as CPTP maps (density states only).
    Exact,
    /// Dropped.
    Skip,
    /// Pre-sampled errors, indexed by instruction.
    Sampled(&'a [Option<PauliError>]),
}

struct Factor {
    state: State,
    qubits: Vec<usize>,
}

/// Product of independent factors over the circuit's qubits.
pub(crate) struct Register {
    kind: StateKind,
    factors: Vec<Option<Factor>>,
    loc: Vec<Option<usize>>,
    /// Trace out released qubits; statevector runs keep them instead,
    /// since dropping one would need a sampled outcome.
    trace_out: bool,
    peak: usize,
}

impl Register {
    pub fn new(kind: StateKind, width: usize) -> Self {
        Self {
            kind,
            factors: Vec::new(),
            loc: vec![None; width],
            trace_out: kind == StateKind::Density,
            peak: 0,
        }
    }

    /// One factor holding `state` on qubits `0..width`.
    pub fn from_state(state: State) -> Self {
        let w = state.width();
        let mut r = Self::new(state.kind(), w);
        r.insert(state, (0..w).collect());
        r
    }

    /// Widest factor seen so far.
    pub fn peak_width(&self) -> usize {
        self.peak
    }

    fn insert(&mut self, state: State, qubits: Vec<usize>) -> usize {
        let id = self.factors.len();
        for &q in &qubits {
            self.loc[q] = Some(id);
        }
        self.peak = self.peak.max(qubits.len());
        self.factors.push(Some(Factor { state, qubits }));
        id
    }

    /// Merges the factors of `qs` (creating |0⟩ where needed) and returns
    /// the factor id with the local position of each qubit.
    fn merge(&mut self, qs: &[usize]) -> Result<(usize, Vec<usize>)> {
        for &q in qs {
            if self.loc[q].is_none() {
                let s = State::zero(self.kind, 1)?;
                self.insert(s, vec![q]);
            }
        }
        let mut ids: Vec<usize> = qs
            .iter()
            .map(|&q| self.loc[q].expect("just ensured"))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let base = ids[0];
        for &id in &ids[1..] {
            let other = self.factors[id].take().expect("live factor");
            let f = self.factors[base].as_mut().expect("live factor");
            f.state = f.state.tensor(&other.state)?;
            for &q in &other.qubits {
                self.loc[q] = Some(base);
            }
            f.qubits.extend(other.qubits);
        }
        let f = self.factors[base].as_ref().expect("live factor");
        self.peak = self.peak.max(f.qubits.len());
        let pos = qs
            .iter()
            .map(|q| f.qubits.iter().position(|x| x == q).expect("merged"))
            .collect();
        Ok((base, pos))
    }

    fn state_mut(&mut self, id: usize) -> &mut State {
        &mut self.factors[id].as_mut().expect("live factor").state
    }

    /// Removes `q` from the register: partial trace for density factors,
    /// sampled collapse for statevectors.
    fn drop_qubit<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        let Some(id) = self.loc[q].take() else {
            return Ok(());
        };
        let f = self.factors[id].as_mut().expect("live factor");
        if f.qubits.len() == 1 {
            self.factors[id] = None;
            return Ok(());
        }
        let pos = f.qubits.iter().position(|&x| x == q).expect("located");
        f.state.discard(pos, rng)?;
        f.qubits.remove(pos);
        Ok(())
    }

    /// Puts `state` on `qubits`, discarding whatever they held.
    fn place<R: Rng + ?Sized>(
        &mut self,
        state: State,
        qubits: Vec<usize>,
        rng: &mut R,
    ) -> Result<()> {
        for &q in &qubits {
            self.drop_qubit(q, rng)?;
        }
        self.insert(state, qubits);
        Ok(())
    }

    fn apply_error(&mut self, err: &PauliError) -> Result<()> {
        let qs: Vec<usize> = err.iter().map(|&(q, _)| q).collect();
        let (id, pos) = self.merge(&qs)?;
        let s = self.state_mut(id);
        let mut ops = vec![Pauli::I; s.width()];
        for (&p, &(_, pauli)) in pos.iter().zip(err) {
            ops[p] = pauli;
        }
        s.apply_pauli(&PauliString::new(ops, 1.0)?)
    }

    fn apply_channel(&mut self, c: &NoiseChannel) -> Result<()> {
        let (id, pos) = self.merge(&c.qubits())?;
        let s = self.state_mut(id);
        match c {
            NoiseChannel::Depolarizing { p, .. } if pos.len() == 1 => s.depolarize_1q(pos[0], *p),
            NoiseChannel::Depolarizing { p, .. } => s.depolarize_2q(pos[0], pos[1], *p),
            NoiseChannel::Dephasing { p, .. } => s.dephase(pos[0], *p),
            NoiseChannel::BitFlip { p, .. } => s.bit_flip(pos[0], *p),
            NoiseChannel::Correlated { p, .. } => {
                let qubits = c.qubits();
                let w = s.width();
                let mut terms = vec![(1.0 - p, PauliString::identity(w))];
                for k in 1..4 {
                    let mut ops = vec![Pauli::I; w];
                    for (q, pauli) in correlated_error(c, k) {
                        ops[pos[qubits.iter().position(|&x| x == q).expect("channel qubit")]] =
                            pauli;
                    }
                    terms.push((p / 3.0, PauliString::new(ops, 1.0)?));
                }
                s.apply_pauli_channel(&terms)
            }
        }
    }

    /// Runs `program`; `copies` supplies the state for the k-th preparation.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        program: &Program,
        channels: Channels<'_>,
        copies: &mut dyn FnMut(usize, &Arc<TimedCircuit>, f64) -> Result<State>,
        rng: &mut R,
    ) -> Result<()> {
        let mut k = 0;
        for (i, ins) in program.instrs.iter().enumerate() {
            match ins {
                Instr::Unitary { qubits, matrix } => {
                    let (id, pos) = self.merge(qubits)?;
                    self.state_mut(id).apply_unitary(matrix, &pos)?;
                }
                Instr::Channel(c) => match channels {
                    Channels::Exact => self.apply_channel(c)?,
                    Channels::Skip => {}
                    Channels::Sampled(errs) => {
                        if let Some(err) = &errs[i] {
                            self.apply_error(err)?;
                        }
                    }
                },
                Instr::Prepare {
                    register,
                    copy,
                    flip,
                } => {
                    let s = copies(k, copy, *flip)?;
                    k += 1;
                    self.place(s, register.clone(), rng)?;
                }
                Instr::Ghz(qubits) => {
                    let s = ghz_state(self.kind, qubits.len())?;
                    self.place(s, qubits.clone(), rng)?;
                }
                Instr::Fresh(q) => {
                    let s = State::zero(self.kind, 1)?;
                    self.place(s, vec![*q], rng)?;
                }
                Instr::Release(q) => {
                    if self.trace_out {
                        self.drop_qubit(*q, rng)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// `Σ_i c_i ⟨σ_i⟩` over the product state. Qubits never touched are |0⟩.
    pub fn expectation(&self, terms: &[PauliString]) -> Result<f64> {
        let mut total = 0.0;
        for t in terms {
            let mut value = t.coefficient();
            let mut per_factor: Vec<Vec<(usize, Pauli)>> = vec![Vec::new(); self.factors.len()];
            for (q, p) in t.support() {
                match self.loc.get(q).copied().flatten() {
                    Some(id) => {
                        let f = self.factors[id].as_ref().expect("live factor");
                        let pos = f.qubits.iter().position(|&x| x == q).expect("located");
                        per_factor[id].push((pos, p));
                    }
                    None if p.flips() => value = 0.0,
                    None => {}
                }
            }
            if value == 0.0 {
                continue;
            }
            for (id, ops) in per_factor.iter().enumerate() {
                if ops.is_empty() {
                    continue;
                }
                let s = &self.factors[id].as_ref().expect("live factor").state;
                let mut full = vec![Pauli::I; s.width()];
                for &(pos, p) in ops {
                    full[pos] = p;
                }
                value *= s.pauli_expectation(&PauliString::new(full, 1.0)?)?;
            }
            total += value;
        }
        Ok(total)
    }

    /// The state of a register that was built from a single factor.
    pub fn into_state(mut self) -> Result<State> {
        let w = self.loc.len();
        let (id, _) = self.merge(&(0..w).collect::<Vec<_>>())?;
        let f = self.factors[id].take().expect("live factor");
        if f.qubits.iter().enumerate().any(|(i, &q)| i != q) {
            return Err(Error::InvalidState("register factor is permuted".into()));
        }
        Ok(f.state)
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub(crate) fn ghz_state(kind: StateKind, k: usize) -> Result<State> {
    let mut s = State::zero(kind, k)?;
    s.apply_unitary(&sim::hadamard(), &[0])?;
    let cx: Matrix<f64> = sim::controlled(&sim::pauli_matrix(Pauli::X));
    for q in 1..k {
        s.apply_unitary(&cx, &[0, q])?;
    }
    Ok(s)
}

/// Samples one realisation of every channel in `program`.
pub(crate) fn sample_errors<R: Rng + ?Sized>(
    program: &Program,
    rng: &mut R,
) -> (Vec<Option<PauliError>>, bool) {
    let mut any = false;
    let errs = program
        .instrs
        .iter()
        .map(|ins| match ins {
            Instr::Channel(c) => {
                let e = sample_channel(c, rng);
                any |= e.is_some();
                e
            }
            _ => None,
        })
        .collect();
    (errs, any)
}

pub(crate) fn sample_channel<R: Rng + ?Sized>(c: &NoiseChannel, rng: &mut R) -> Option<PauliError> {
    let u: f64 = rng.random();
    if u >= c.probability() {
        return None;
    }
    Some(match c {
        NoiseChannel::Depolarizing { qubits, .. } if qubits.len() == 1 => {
            vec![(qubits[0], Pauli::ALL[rng.random_range(1..4)])]
        }
        NoiseChannel::Depolarizing { qubits, .. } => {
            let k = rng.random_range(1..16);
            vec![
                (qubits[0], Pauli::ALL[k & 3]),
                (qubits[1], Pauli::ALL[k >> 2]),
            ]
        }
        NoiseChannel::Dephasing { qubit, .. } => vec![(*qubit, Pauli::Z)],
        NoiseChannel::BitFlip { qubit, .. } => vec![(*qubit, Pauli::X)],
        NoiseChannel::Correlated { .. } => correlated_error(c, rng.random_range(1..4)),
    })
}

/// Outcome `k` of a correlated channel: 1 = X part, 2 = Z part, 3 = both.
fn correlated_error(c: &NoiseChannel, k: usize) -> PauliError {
    let NoiseChannel::Correlated { x, z, .. } = c else {
        unreachable!("only correlated channels have parts");
    };
    let mut ops: Vec<(usize, Pauli)> = Vec::new();
    if k & 1 != 0 {
        ops.extend(x.iter().map(|&q| (q, Pauli::X)));
    }
    if k & 2 != 0 {
        for &q in z {
            match ops.iter_mut().find(|(p, _)| *p == q) {
                Some(e) => e.1 = Pauli::Y,
                None => ops.push((q, Pauli::Z)),
            }
        }
    }
    ops
}

/// Initial copy register: each qubit flipped with probability `flip`.
pub(crate) fn flipped_zero(kind: StateKind, width: usize, flip: f64) -> Result<State> {
    let mut s = State::zero(kind, width)?;
    if flip > 0.0 {
        for q in 0..width {
            s.bit_flip(q, flip)?;
        }
    }
    Ok(s)
}
