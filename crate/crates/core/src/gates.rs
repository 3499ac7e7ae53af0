//! Trapped-ion native gates {Rx, Ry, virtual Rz, Rzz} and compiled
//! decompositions of H, controlled Paulis and C-SWAP.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::sim::{self, Matrix, Pauli, QuantumState, StateKind};
use crate::{Error, Result};

/// Default event durations in microseconds.
pub mod durations {
    pub const RZ: f64 = 0.0;
    pub const SINGLE_QUBIT: f64 = 1.0;
    pub const RZZ: f64 = 10.0;
    pub const DETECTION: f64 = 100.0;
    pub const MID_CIRCUIT_PREP: f64 = 1.0;
    pub const BELL_PAIR: f64 = 100.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Rzz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        if self == GateKind::Rzz {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Rzz => "RZZ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NativeGate {
    pub kind: GateKind,
    pub angle: f64,
    targets: [usize; 2],
    pub duration: f64,
    /// Virtual Rz gates are noiseless; every physical gate is noisy.
    pub noisy: bool,
}

impl NativeGate {
    fn single(kind: GateKind, q: usize, angle: f64) -> Self {
        let duration = if kind == GateKind::Rz {
            durations::RZ
        } else {
            durations::SINGLE_QUBIT
        };
        Self {
            kind,
            angle,
            targets: [q, q],
            duration,
            noisy: kind != GateKind::Rz,
        }
    }

    pub fn rx(q: usize, angle: f64) -> Self {
        Self::single(GateKind::Rx, q, angle)
    }

    pub fn ry(q: usize, angle: f64) -> Self {
        Self::single(GateKind::Ry, q, angle)
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Self::single(GateKind::Rz, q, angle)
    }

    /// Panics if `a == b`; Rzz needs two distinct ions.
    pub fn rzz(a: usize, b: usize, angle: f64) -> Self {
        assert_ne!(a, b, "Rzz targets must differ");
        Self {
            kind: GateKind::Rzz,
            angle,
            targets: [a, b],
            duration: durations::RZZ,
            noisy: true,
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets[..self.kind.arity()]
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    /// Relabels targets through `map`.
    pub fn remap(mut self, map: &[usize]) -> Self {
        self.targets = [map[self.targets[0]], map[self.targets[1]]];
        self
    }

    pub fn matrix(&self) -> Matrix<f64> {
        match self.kind {
            GateKind::Rx => sim::rx(self.angle),
            GateKind::Ry => sim::ry(self.angle),
            GateKind::Rz => sim::rz(self.angle),
            GateKind::Rzz => sim::rzz(self.angle),
        }
    }
}

impl fmt::Display for NativeGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:.12}", self.kind.name(), self.angle)?;
        for t in self.targets() {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

/// Default duration of a gate of this kind.
pub fn gate_duration(g: &NativeGate) -> f64 {
    match g.kind {
        GateKind::Rz => durations::RZ,
        GateKind::Rx | GateKind::Ry => durations::SINGLE_QUBIT,
        GateKind::Rzz => durations::RZZ,
    }
}

/// An ordered list of native gates, first element applied first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GateSequence {
    width: usize,
    gates: Vec<NativeGate>,
}

impl GateSequence {
    pub fn new(width: usize, gates: Vec<NativeGate>) -> Result<Self> {
        for g in &gates {
            for &t in g.targets() {
                if t >= width {
                    return Err(Error::QubitOutOfRange { qubit: t, width });
                }
            }
        }
        Ok(Self { width, gates })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[NativeGate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<NativeGate> {
        self.gates
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// Gates that take physical time (everything except virtual Rz).
    pub fn physical_count(&self) -> usize {
        self.gates.iter().filter(|g| g.noisy).count()
    }

    /// Composite unitary, built column by column.
    pub fn unitary(&self) -> Matrix<f64> {
        let d = 1usize << self.width;
        let bound: Vec<_> = self
            .gates
            .iter()
            .map(|g| sim::BoundUnitary::new(&g.matrix(), g.targets()).expect("native gate"))
            .collect();
        let mut m = Matrix::zeros(d);
        for col in 0..d {
            let mut s = QuantumState::<f64>::basis(StateKind::Statevector, self.width, col)
                .expect("small width");
            for u in &bound {
                s.apply_bound(u).expect("targets checked at construction");
            }
            for (row, a) in s.data().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        m
    }

    /// One gate per line: `KIND angle target…`.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            writeln!(out, "{g}").expect("writing to a String");
        }
        out
    }
}

/// `H = Rz(π/2) Rx(π/2) Rz(π/2)` up to global phase.
pub fn decompose_hadamard(q: usize) -> GateSequence {
    GateSequence {
        width: q + 1,
        gates: vec![
            NativeGate::rz(q, FRAC_PI_2),
            NativeGate::rx(q, FRAC_PI_2),
            NativeGate::rz(q, FRAC_PI_2),
        ],
    }
}

/// Controlled-`p` from one `Rzz(−π/2)` plus single-qubit rotations.
pub fn decompose_controlled_pauli(p: Pauli, control: usize, target: usize) -> Result<GateSequence> {
    if control == target {
        return Err(Error::DuplicateTarget(control));
    }
    let (c, t) = (control, target);
    let zz = NativeGate::rzz(c, t, -FRAC_PI_2);
    let gates = match p {
        Pauli::X => vec![
            NativeGate::rz(c, FRAC_PI_2),
            NativeGate::rz(t, FRAC_PI_2),
            NativeGate::rx(t, FRAC_PI_2),
            NativeGate::rz(t, PI),
            zz,
            NativeGate::rz(t, FRAC_PI_2),
            NativeGate::rx(t, FRAC_PI_2),
            NativeGate::rz(t, FRAC_PI_2),
        ],
        Pauli::Y => vec![
            NativeGate::rz(c, FRAC_PI_2),
            NativeGate::rx(t, FRAC_PI_2),
            NativeGate::rz(t, 3.0 * FRAC_PI_2),
            zz,
            NativeGate::rx(t, FRAC_PI_2),
            NativeGate::rz(t, PI),
        ],
        Pauli::Z => vec![
            NativeGate::rz(c, FRAC_PI_2),
            NativeGate::rz(t, FRAC_PI_2),
            zz,
        ],
        Pauli::I => {
            return Err(Error::InvalidParameter(
                "controlled identity is not a gate".into(),
            ))
        }
    };
    Ok(GateSequence {
        width: c.max(t) + 1,
        gates,
    })
}

/// Frozen C-SWAP compilation on roles (0 = control, 1 = t1, 2 = t2):
/// `(kind, angle in units of π/4, role, second role)`.
///
/// Found by numerical recompilation over π/4-grid angles; six Rzz gates.
const CSWAP_STEPS: [(GateKind, i8, u8, u8); 44] = {
    use GateKind::{Ry as Y, Rz as Z, Rzz as ZZ};
    [
        (Z, -2, 0, 0),
        (Y, -3, 0, 0),
        (Z, -3, 1, 1),
        (Y, 2, 1, 1),
        (Z, 1, 2, 2),
        (Y, 4, 2, 2),
        (ZZ, -2, 1, 2),
        (Z, 4, 0, 0),
        (Y, 1, 0, 0),
        (Z, -2, 1, 1),
        (Y, 2, 1, 1),
        (Y, 4, 2, 2),
        (Z, 2, 2, 2),
        (ZZ, 1, 0, 1),
        (Z, -3, 1, 1),
        (Y, -2, 1, 1),
        (Y, 2, 2, 2),
        (ZZ, -1, 0, 2),
        (Z, -2, 0, 0),
        (Y, 3, 0, 0),
        (Z, -1, 1, 1),
        (Y, 4, 1, 1),
        (ZZ, 2, 1, 2),
        (Y, 1, 0, 0),
        (Z, 1, 1, 1),
        (Y, 2, 1, 1),
        (Z, 1, 2, 2),
        (Y, 3, 2, 2),
        (ZZ, 1, 0, 1),
        (Z, -2, 0, 0),
        (Y, 4, 0, 0),
        (Z, -1, 1, 1),
        (Y, 2, 1, 1),
        (Z, 2, 2, 2),
        (Y, -2, 2, 2),
        (ZZ, 2, 1, 2),
        (Z, 2, 0, 0),
        (Y, 4, 0, 0),
        (Z, -1, 0, 0),
        (Y, 2, 1, 1),
        (Z, 3, 1, 1),
        (Z, -1, 2, 2),
        (Y, -2, 2, 2),
        (Z, 1, 2, 2),
    ]
};

/// C-SWAP with six Rzz gates and every angle a multiple of π/4.
pub fn decompose_cswap(control: usize, t1: usize, t2: usize) -> Result<GateSequence> {
    if control == t1 || control == t2 {
        return Err(Error::DuplicateTarget(control));
    }
    if t1 == t2 {
        return Err(Error::DuplicateTarget(t1));
    }
    let roles = [control, t1, t2];
    let gates = CSWAP_STEPS
        .iter()
        .map(|&(kind, k, a, b)| {
            let angle = f64::from(k) * FRAC_PI_4;
            let (a, b) = (roles[a as usize], roles[b as usize]);
            match kind {
                GateKind::Rx => NativeGate::rx(a, angle),
                GateKind::Ry => NativeGate::ry(a, angle),
                GateKind::Rz => NativeGate::rz(a, angle),
                GateKind::Rzz => NativeGate::rzz(a, b, angle),
            }
        })
        .collect();
    Ok(GateSequence {
        width: control.max(t1).max(t2) + 1,
        gates,
    })
}

/// Ideal controlled-Pauli matrix on `[control, target]`.
pub fn controlled_pauli_matrix(p: Pauli) -> Matrix<f64> {
    sim::controlled(&sim::pauli_matrix(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cswap_constant_shape() {
        let s = decompose_cswap(0, 1, 2).unwrap();
        assert_eq!(s.count(GateKind::Rzz), 6);
        assert_eq!(s.count(GateKind::Rx), 0);
    }

    #[test]
    fn listing_has_one_line_per_gate() {
        let s = decompose_hadamard(0);
        let text = s.listing();
        assert_eq!(text.lines().count(), 3);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("RX 1.570796326795"));
    }
}
