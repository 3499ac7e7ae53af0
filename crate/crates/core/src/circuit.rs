//! Timed circuits: ordered events, each carrying a duration in microseconds.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::gates::{GateKind, GateSequence, NativeGate};
use crate::sim::Pauli;
use crate::{Error, Result};

/// Noiseless, instantaneous helper gates used only to compress observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtificialGate {
    Toffoli { c1: usize, c2: usize, target: usize },
    Cnot { control: usize, target: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseChannel {
    /// Uniform over the non-identity Paulis on one or two qubits.
    Depolarizing { qubits: Vec<usize>, p: f64 },
    /// Z with probability `p`.
    Dephasing { qubit: usize, p: f64 },
    /// X with probability `p`.
    BitFlip { qubit: usize, p: f64 },
    /// Depolarising noise whose X part fans out: with probability `p/3`
    /// each, X on every `x` qubit, Z on every `z` qubit, or both.
    Correlated {
        x: Vec<usize>,
        z: Vec<usize>,
        p: f64,
    },
}

impl NoiseChannel {
    pub fn probability(&self) -> f64 {
        match self {
            NoiseChannel::Depolarizing { p, .. }
            | NoiseChannel::Dephasing { p, .. }
            | NoiseChannel::BitFlip { p, .. }
            | NoiseChannel::Correlated { p, .. } => *p,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            NoiseChannel::Depolarizing { qubits, .. } => qubits.clone(),
            NoiseChannel::Dephasing { qubit, .. } | NoiseChannel::BitFlip { qubit, .. } => {
                vec![*qubit]
            }
            NoiseChannel::Correlated { x, z, .. } => {
                let mut q: Vec<usize> = x.iter().chain(z).copied().collect();
                q.sort_unstable();
                q.dedup();
                q
            }
        }
    }
}

/// Where a measurement's outcome comes from, which decides how a folded
/// network error is charged to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Local,
    /// Control (X-basis) bit of a folded remote BSM.
    FoldedBsmControl,
    /// Target (Z-basis) bit of a folded remote BSM.
    FoldedBsmTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Gate(NativeGate),
    Artificial(ArtificialGate),
    Channel(NoiseChannel),
    /// Z-basis readout; `flip` is the probability the recorded bit is wrong.
    Measure {
        qubit: usize,
        flip: f64,
        kind: MeasureKind,
    },
    Reset {
        qubit: usize,
    },
    /// Prepares one copy of the workload state on `register`.
    ///
    /// `flip` is a bit-flip probability on each freshly reset qubit.
    PrepareCopy {
        register: Vec<usize>,
        circuit: Arc<TimedCircuit>,
        mid_circuit: bool,
        flip: f64,
    },
    /// GHZ state across `qubits`; two qubits make a Bell pair.
    GhzPrep {
        qubits: Vec<usize>,
    },
    /// A consumed Bell pair whose error is folded onto `qubit` as
    /// depolarising noise; no network qubits are simulated.
    FoldedLink {
        qubit: usize,
    },
    /// Applies `pauli` to `target` iff the parity of `controls` outcomes is 1.
    Feedback {
        controls: Vec<usize>,
        pauli: Pauli,
        target: usize,
    },
    /// Holds later events on `qubits` until all of them are free.
    Barrier {
        qubits: Vec<usize>,
    },
}

impl Op {
    /// Qubits whose clocks the event occupies.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::Gate(g) => g.targets().to_vec(),
            Op::Artificial(ArtificialGate::Toffoli { c1, c2, target }) => vec![*c1, *c2, *target],
            Op::Artificial(ArtificialGate::Cnot { control, target }) => vec![*control, *target],
            Op::Channel(c) => c.qubits(),
            Op::Measure { qubit, .. } | Op::Reset { qubit } | Op::FoldedLink { qubit } => {
                vec![*qubit]
            }
            Op::PrepareCopy { register, .. } => register.clone(),
            Op::GhzPrep { qubits } | Op::Barrier { qubits } => qubits.clone(),
            Op::Feedback {
                controls, target, ..
            } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
        }
    }
}

/// Which logical building block an event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    CopyPrep,
    AncillaPrep,
    ControlledSigma,
    Cswap,
    Bsm,
    Teleport,
    AncillaMeasure,
}

/// Tags an event with its block instance and transversal layer so that
/// resource counts can be read back from a finished circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub kind: BlockKind,
    pub id: u32,
    pub layer: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub op: Op,
    /// `None` until a duration is assigned; scheduling rejects it.
    pub duration: Option<f64>,
    pub block: Option<Block>,
}

impl Event {
    pub fn new(op: Op, duration: f64) -> Self {
        Self {
            op,
            duration: Some(duration),
            block: None,
        }
    }

    pub fn in_block(mut self, block: Option<Block>) -> Self {
        self.block = block;
        self
    }

    pub fn instant(op: Op) -> Self {
        Self::new(op, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimedCircuit {
    width: usize,
    events: Vec<Event>,
}

impl TimedCircuit {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            events: Vec::new(),
        }
    }

    pub fn from_events(width: usize, events: Vec<Event>) -> Result<Self> {
        let mut c = Self::new(width);
        for e in events {
            c.push(e)?;
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, e: Event) -> Result<()> {
        for q in e.op.qubits() {
            if q >= self.width {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    width: self.width,
                });
            }
        }
        self.events.push(e);
        Ok(())
    }

    /// Appends an event whose qubits are known to be in range.
    pub(crate) fn add(&mut self, op: Op, duration: f64) {
        self.add_event(Event::new(op, duration));
    }

    pub(crate) fn add_event(&mut self, e: Event) {
        debug_assert!(e.op.qubits().iter().all(|&q| q < self.width));
        self.events.push(e);
    }

    /// Widens the register to at least `width` qubits.
    pub fn grow(&mut self, width: usize) {
        self.width = self.width.max(width);
    }

    pub fn gate(&mut self, g: NativeGate) {
        let d = g.duration;
        self.add(Op::Gate(g), d);
    }

    pub fn gates(&mut self, seq: GateSequence) {
        for g in seq.into_gates() {
            self.gate(g);
        }
    }

    pub fn extend(&mut self, other: &TimedCircuit) -> Result<()> {
        for e in &other.events {
            self.push(e.clone())?;
        }
        Ok(())
    }

    /// Every native gate, in order.
    pub fn native_gates(&self) -> impl Iterator<Item = &NativeGate> {
        self.events.iter().filter_map(|e| match &e.op {
            Op::Gate(g) => Some(g),
            _ => None,
        })
    }

    pub fn count_gates(&self, kind: GateKind) -> usize {
        self.native_gates().filter(|g| g.kind == kind).count()
    }

    /// Line-oriented listing: gates as `KIND angle targets`, then
    /// `CHANNEL`, `MEASURE`, `RESET` and `CLASSICAL-FEEDBACK` lines.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            writeln!(out, "{}", EventLine(e)).expect("writing to a String");
        }
        out
    }
}

struct EventLine<'a>(&'a Event);

fn join(qs: &[usize]) -> String {
    qs.iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for EventLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.op {
            Op::Gate(g) => write!(f, "{g}"),
            Op::Artificial(ArtificialGate::Toffoli { c1, c2, target }) => {
                write!(f, "ARTIFICIAL TOFFOLI {c1} {c2} {target}")
            }
            Op::Artificial(ArtificialGate::Cnot { control, target }) => {
                write!(f, "ARTIFICIAL CNOT {control} {target}")
            }
            Op::Channel(NoiseChannel::Depolarizing { qubits, p }) => {
                write!(f, "CHANNEL DEPOLARIZING {p:e} {}", join(qubits))
            }
            Op::Channel(NoiseChannel::Dephasing { qubit, p }) => {
                write!(f, "CHANNEL DEPHASING {p:e} {qubit}")
            }
            Op::Channel(NoiseChannel::BitFlip { qubit, p }) => {
                write!(f, "CHANNEL BITFLIP {p:e} {qubit}")
            }
            Op::Channel(NoiseChannel::Correlated { x, z, p }) => {
                write!(f, "CHANNEL CORRELATED {p:e} x={} z={}", join(x), join(z))
            }
            Op::Measure { qubit, flip, kind } => {
                write!(f, "MEASURE {qubit} flip={flip:e} {kind:?}")
            }
            Op::Reset { qubit } => write!(f, "RESET {qubit}"),
            Op::PrepareCopy {
                register,
                circuit,
                mid_circuit,
                flip,
            } => write!(
                f,
                "PREPARE {} events={} mid_circuit={mid_circuit} flip={flip:e}",
                join(register),
                circuit.len()
            ),
            Op::GhzPrep { qubits } => write!(f, "GHZ {}", join(qubits)),
            Op::FoldedLink { qubit } => write!(f, "FOLDED-LINK {qubit}"),
            Op::Feedback {
                controls,
                pauli,
                target,
            } => write!(
                f,
                "CLASSICAL-FEEDBACK {} {target} if {}",
                pauli.letter(),
                join(controls)
            ),
            Op::Barrier { qubits } => write!(f, "BARRIER {}", join(qubits)),
        }
    }
}
