//! Error-probability bundles, idle accounting and noise attachment.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{Event, MeasureKind, NoiseChannel, Op, TimedCircuit};
use crate::gates::{durations, GateKind};
use crate::sim::{QuantumState, StateKind};
use crate::{Error, Result, State};

/// Event durations in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Durations {
    pub rz: f64,
    pub single_qubit: f64,
    pub rzz: f64,
    pub detection: f64,
    pub mid_circuit_prep: f64,
    pub bell_pair: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Self {
            rz: durations::RZ,
            single_qubit: durations::SINGLE_QUBIT,
            rzz: durations::RZZ,
            detection: durations::DETECTION,
            mid_circuit_prep: durations::MID_CIRCUIT_PREP,
            bell_pair: durations::BELL_PAIR,
        }
    }
}

impl Durations {
    pub fn of_gate(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::Rz => self.rz,
            GateKind::Rx | GateKind::Ry => self.single_qubit,
            GateKind::Rzz => self.rzz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    #[serde(rename = "p1Q")]
    pub p1q: f64,
    #[serde(rename = "p2Q")]
    pub p2q: f64,
    #[serde(rename = "pBell")]
    pub p_bell: f64,
    #[serde(rename = "pDetect")]
    pub p_detect: f64,
    #[serde(rename = "pMidPrep")]
    pub p_mid_prep: f64,
    /// Dephasing probability per microsecond of idling.
    #[serde(rename = "idleRate")]
    pub idle_rate: f64,
    #[serde(default)]
    pub durations: Durations,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::reference()
    }
}

impl NoiseModel {
    /// Reference trapped-ion error rates.
    pub fn reference() -> Self {
        Self {
            p1q: 1e-4,
            p2q: 1e-3,
            p_bell: 1e-2,
            p_detect: 1e-3,
            p_mid_prep: 1e-3,
            idle_rate: 1e-5,
            durations: Durations::default(),
        }
    }

    pub fn noiseless() -> Self {
        Self {
            p1q: 0.0,
            p2q: 0.0,
            p_bell: 0.0,
            p_detect: 0.0,
            p_mid_prep: 0.0,
            idle_rate: 0.0,
            durations: Durations::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p1Q", self.p1q),
            ("p2Q", self.p2q),
            ("pBell", self.p_bell),
            ("pDetect", self.p_detect),
            ("pMidPrep", self.p_mid_prep),
            ("idleRate", self.idle_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config {
                    field: name.into(),
                    message: format!("{p} is outside [0, 1]"),
                });
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1q == 0.0
            && self.p2q == 0.0
            && self.p_bell == 0.0
            && self.p_detect == 0.0
            && self.p_mid_prep == 0.0
            && self.idle_rate == 0.0
    }
}

/// Which probabilities a [`ScaledModel`] multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaledSet {
    #[serde(rename = "p1Q")]
    pub p1q: bool,
    #[serde(rename = "p2Q")]
    pub p2q: bool,
    #[serde(rename = "pBell")]
    pub p_bell: bool,
}

impl Default for ScaledSet {
    fn default() -> Self {
        Self::ALL
    }
}

impl ScaledSet {
    pub const ALL: Self = Self {
        p1q: true,
        p2q: true,
        p_bell: true,
    };
}

/// A base model with a subset of gate and link errors multiplied by `c`.
///
/// Idle, detection and mid-circuit preparation errors are never scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledModel {
    pub base: NoiseModel,
    pub c: f64,
    pub subset: ScaledSet,
}

impl ScaledModel {
    pub fn new(base: NoiseModel, c: f64, subset: ScaledSet) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale factor {c} must be positive"
            )));
        }
        Ok(Self { base, c, subset })
    }

    pub fn model(&self) -> NoiseModel {
        let s = |on: bool, p: f64| if on { (self.c * p).min(1.0) } else { p };
        NoiseModel {
            p1q: s(self.subset.p1q, self.base.p1q),
            p2q: s(self.subset.p2q, self.base.p2q),
            p_bell: s(self.subset.p_bell, self.base.p_bell),
            ..self.base
        }
    }
}

/// `λ(t) = 1 − (1 − r)^t` for an idle gap of `t` microseconds.
pub fn idle_error_probability(t: f64, model: &NoiseModel) -> f64 {
    if t <= 0.0 || model.idle_rate == 0.0 {
        return 0.0;
    }
    -(t * (-model.idle_rate).ln_1p()).exp_m1()
}

/// Probability that exactly one of two independent flips occurs.
pub fn compose_flips(a: f64, b: f64) -> f64 {
    a + b - 2.0 * a * b
}

/// Per-qubit timing extracted by list scheduling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScheduleReport {
    pub makespan: f64,
    pub busy: Vec<f64>,
    /// Gaps between consecutive events on a qubit.
    pub idle: Vec<f64>,
    pub first_start: Vec<Option<f64>>,
    pub last_end: Vec<f64>,
}

/// An event's timing as seen by the scheduler.
struct Slot {
    start: f64,
    /// `(qubit, gap)` idle gaps that end when this event starts.
    gaps: Vec<(usize, f64)>,
}

fn timed_qubits(op: &Op) -> Option<(Vec<usize>, bool)> {
    // (qubits occupied, whether the event replaces the qubit's state)
    match op {
        Op::Channel(_) | Op::Artificial(_) | Op::Barrier { .. } => None,
        Op::Feedback { target, .. } => Some((vec![*target], false)),
        Op::Reset { .. } | Op::PrepareCopy { .. } | Op::GhzPrep { .. } => Some((op.qubits(), true)),
        _ => Some((op.qubits(), false)),
    }
}

/// ASAP list scheduling in event order, calling `visit` for every event.
fn walk(
    circuit: &TimedCircuit,
    mut visit: impl FnMut(&Event, Option<&Slot>),
) -> Result<ScheduleReport> {
    let w = circuit.width();
    let mut free = vec![0.0f64; w];
    let mut sync = vec![0.0f64; w];
    let mut touched = vec![false; w];
    let mut rep = ScheduleReport {
        makespan: 0.0,
        busy: vec![0.0; w],
        idle: vec![0.0; w],
        first_start: vec![None; w],
        last_end: vec![0.0; w],
    };
    for (i, e) in circuit.events().iter().enumerate() {
        let d = e.duration.ok_or(Error::MissingDuration(i))?;
        if let Op::Barrier { qubits } = &e.op {
            let t = qubits
                .iter()
                .map(|&q| free[q].max(sync[q]))
                .fold(0.0, f64::max);
            for &q in qubits {
                sync[q] = t;
            }
            visit(e, None);
            continue;
        }
        let Some((qs, replaces)) = timed_qubits(&e.op) else {
            visit(e, None);
            continue;
        };
        let start = qs.iter().map(|&q| free[q].max(sync[q])).fold(0.0, f64::max);
        let mut gaps = Vec::new();
        for &q in &qs {
            if touched[q] && !replaces {
                let g = start - free[q];
                if g > 0.0 {
                    gaps.push((q, g));
                    rep.idle[q] += g;
                }
            }
            touched[q] = true;
            free[q] = start + d;
            rep.busy[q] += d;
            rep.last_end[q] = start + d;
            rep.first_start[q].get_or_insert(start);
        }
        rep.makespan = rep.makespan.max(start + d);
        visit(e, Some(&Slot { start, gaps }));
    }
    Ok(rep)
}

/// Timing audit without attaching noise.
pub fn schedule(circuit: &TimedCircuit) -> Result<ScheduleReport> {
    walk(circuit, |_, _| {})
}

/// Start time of every event, for inspection.
pub fn start_times(circuit: &TimedCircuit) -> Result<Vec<Option<f64>>> {
    let mut out = Vec::with_capacity(circuit.len());
    walk(circuit, |_, slot| out.push(slot.map(|s| s.start)))?;
    Ok(out)
}

/// Attaches `model`'s channels to every event of `circuit`.
///
/// Copy-preparation sub-circuits are scheduled with the same model.
pub fn schedule_noise(circuit: &TimedCircuit, model: &NoiseModel) -> Result<TimedCircuit> {
    schedule_noise_split(circuit, model, model)
}

/// Like [`schedule_noise`] but with a separate model for copy preparation.
pub fn schedule_noise_split(
    circuit: &TimedCircuit,
    copy_model: &NoiseModel,
    model: &NoiseModel,
) -> Result<TimedCircuit> {
    let mut copies: HashMap<*const TimedCircuit, Arc<TimedCircuit>> = HashMap::new();
    let mut out = TimedCircuit::new(circuit.width());
    let mut failure = None;
    walk(circuit, |e, slot| {
        if failure.is_some() {
            return;
        }
        if let Some(slot) = slot {
            for &(q, g) in &slot.gaps {
                let p = idle_error_probability(g, model);
                push_channel(&mut out, NoiseChannel::Dephasing { qubit: q, p });
            }
        }
        match &e.op {
            Op::Gate(g) => {
                out.add_event(e.clone());
                if g.noisy {
                    let (qubits, p) = match g.kind {
                        GateKind::Rzz => (g.targets().to_vec(), model.p2q),
                        _ => (g.targets().to_vec(), model.p1q),
                    };
                    push_channel(&mut out, NoiseChannel::Depolarizing { qubits, p });
                }
            }
            Op::Measure { qubit, flip, kind } => {
                let network = match kind {
                    MeasureKind::Local => 0.0,
                    MeasureKind::FoldedBsmControl => model.p_bell / 3.0,
                    MeasureKind::FoldedBsmTarget => 2.0 * model.p_bell / 3.0,
                };
                let flip = compose_flips(compose_flips(*flip, network), model.p_detect);
                out.add_event(Event {
                    op: Op::Measure {
                        qubit: *qubit,
                        flip,
                        kind: *kind,
                    },
                    ..e.clone()
                });
            }
            Op::Reset { qubit } => {
                out.add_event(e.clone());
                push_channel(
                    &mut out,
                    NoiseChannel::BitFlip {
                        qubit: *qubit,
                        p: model.p_mid_prep,
                    },
                );
            }
            Op::PrepareCopy {
                register,
                circuit: copy,
                mid_circuit,
                flip,
            } => {
                let key = Arc::as_ptr(copy);
                let noisy = match copies.get(&key) {
                    Some(c) => c.clone(),
                    None => match schedule_copy(copy, copy_model) {
                        Ok(c) => {
                            let c = Arc::new(c);
                            copies.insert(key, c.clone());
                            c
                        }
                        Err(err) => {
                            failure = Some(err);
                            return;
                        }
                    },
                };
                let extra = if *mid_circuit { model.p_mid_prep } else { 0.0 };
                out.add_event(Event {
                    op: Op::PrepareCopy {
                        register: register.clone(),
                        circuit: noisy,
                        mid_circuit: *mid_circuit,
                        flip: compose_flips(*flip, extra),
                    },
                    ..e.clone()
                });
            }
            Op::GhzPrep { qubits } => {
                out.add_event(e.clone());
                // the j-th Bell pair's error lands on qubits[j]; fusion
                // carries its X part on to every later qubit
                for j in 1..qubits.len() {
                    let c = if j + 1 == qubits.len() {
                        NoiseChannel::Depolarizing {
                            qubits: vec![qubits[j]],
                            p: model.p_bell,
                        }
                    } else {
                        NoiseChannel::Correlated {
                            x: qubits[j..].to_vec(),
                            z: vec![qubits[j]],
                            p: model.p_bell,
                        }
                    };
                    push_channel(&mut out, c);
                }
            }
            Op::FoldedLink { qubit } => {
                out.add_event(e.clone());
                push_channel(
                    &mut out,
                    NoiseChannel::Depolarizing {
                        qubits: vec![*qubit],
                        p: model.p_bell,
                    },
                );
            }
            Op::Channel(c) => push_channel(&mut out, c.clone()),
            Op::Artificial(_) | Op::Feedback { .. } | Op::Barrier { .. } => {
                out.add_event(e.clone())
            }
        }
    })?;
    match failure {
        Some(err) => Err(err),
        None => Ok(out),
    }
}

/// Schedules a copy-preparation circuit and pads every qubit with idle
/// noise up to the copy's makespan, so the copy is handed over as a whole.
pub fn schedule_copy(copy: &TimedCircuit, model: &NoiseModel) -> Result<TimedCircuit> {
    let rep = schedule(copy)?;
    let mut out = schedule_noise_split(copy, model, model)?;
    for q in 0..copy.width() {
        if rep.first_start[q].is_some() {
            let g = rep.makespan - rep.last_end[q];
            if g > 0.0 {
                let p = idle_error_probability(g, model);
                push_channel(&mut out, NoiseChannel::Dephasing { qubit: q, p });
            }
        }
    }
    Ok(out)
}

fn push_channel(out: &mut TimedCircuit, c: NoiseChannel) {
    if c.probability() > 0.0 {
        out.add(Op::Channel(c), 0.0);
    }
}

/// `(1 − p)|Φ⁺⟩⟨Φ⁺| + (p/3)` times each other Bell projector.
pub fn noisy_bell_pair(model: &NoiseModel) -> State {
    let mut s = QuantumState::zero(StateKind::Density, 2).expect("two qubits");
    s.apply_unitary(&crate::sim::hadamard(), &[0])
        .expect("valid");
    s.apply_unitary(
        &crate::sim::controlled(&crate::sim::pauli_matrix(crate::sim::Pauli::X)),
        &[0, 1],
    )
    .expect("valid");
    s.depolarize_1q(1, model.p_bell)
        .expect("validated probability");
    s
}
