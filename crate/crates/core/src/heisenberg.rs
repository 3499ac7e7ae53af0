//! Trotterised random-field Heisenberg chain: native-gate circuit and the
//! exact Trotterised reference state.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::TimedCircuit;
use crate::gates::NativeGate;
use crate::noise::Durations;
use crate::sim::{self, linalg::hermitian_expm, Pauli, PauliString, StateKind};
use crate::{Error, Result, State};

/// Field vectors of the three benchmark chain lengths.
pub const H4: [f64; 4] = [-0.887, -0.925, -0.72, 0.08];
pub const H5: [f64; 5] = [0.206, -0.649, 0.598, -0.826, 0.702];
pub const H6: [f64; 6] = [-0.859, 0.396, -0.354, 0.634, -0.893, 0.198];

pub const DEFAULT_DELTA_T: f64 = 0.01;
/// 1-based index of the site flipped to |1⟩ in the initial state.
pub const DEFAULT_INIT_SITE: usize = 3;
/// Largest chain the dense reference will build.
pub const IDEAL_STATE_CAP: usize = 12;

/// Looks up `h4`, `h5` or `h6`.
pub fn preset(name: &str) -> Option<Vec<f64>> {
    match name {
        "h4" => Some(H4.to_vec()),
        "h5" => Some(H5.to_vec()),
        "h6" => Some(H6.to_vec()),
        _ => None,
    }
}

/// `K = ⌊1/(3 N p2Q)⌋`: one expected two-qubit error per copy.
pub fn trotter_steps_for_budget(n_sites: usize, p2q: f64) -> Result<usize> {
    if n_sites < 2 {
        return Err(Error::InvalidParameter(format!(
            "a chain needs at least 2 sites, got {n_sites}"
        )));
    }
    if !(p2q > 0.0) {
        return Err(Error::UnboundedBudget);
    }
    Ok((1.0 / (3.0 * n_sites as f64 * p2q)).floor() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeisenbergParams {
    pub j: f64,
    /// One field per site; its length fixes the chain length.
    pub h: Vec<f64>,
    pub delta_t: f64,
    pub k: usize,
    pub init_site: usize,
}

impl HeisenbergParams {
    /// Excites site 3, or the last site of a shorter chain.
    pub fn new(h: Vec<f64>, k: usize) -> Result<Self> {
        let p = Self {
            j: 1.0,
            init_site: DEFAULT_INIT_SITE.min(h.len()),
            h,
            delta_t: DEFAULT_DELTA_T,
            k,
        };
        p.validate()?;
        Ok(p)
    }

    /// A named preset with K from the two-qubit error budget.
    pub fn from_preset(name: &str, p2q: f64) -> Result<Self> {
        let h = preset(name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown field preset `{name}`")))?;
        let k = trotter_steps_for_budget(h.len(), p2q)?;
        Self::new(h, k)
    }

    pub fn n_sites(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "a chain needs at least 2 sites, got {n}"
            )));
        }
        if let Some(h) = self.h.iter().find(|h| !(h.abs() <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "field {h} outside [-1, 1]"
            )));
        }
        if !self.j.is_finite() || !self.delta_t.is_finite() {
            return Err(Error::InvalidParameter("J and δt must be finite".into()));
        }
        if !(1..=n).contains(&self.init_site) {
            return Err(Error::InvalidParameter(format!(
                "initial site {} outside 1..={n}",
                self.init_site
            )));
        }
        Ok(())
    }

    fn init_qubit(&self) -> usize {
        self.init_site - 1
    }

    /// Periodic bonds split into an even layer and an odd layer; for odd
    /// chains the wrap-around bond goes in the odd layer.
    pub fn bond_layers(&self) -> [Vec<(usize, usize)>; 2] {
        let n = self.n_sites();
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for j in 0..n {
            let bond = (j, (j + 1) % n);
            // with two sites the periodic bond appears twice, once per layer
            if j % 2 == 0 && !(n % 2 == 1 && j == n - 1) {
                even.push(bond);
            } else {
                odd.push(bond);
            }
        }
        [even, odd]
    }

    /// `Z` on the initially excited site.
    pub fn default_observable(&self) -> PauliString {
        PauliString::single(self.n_sites(), self.init_qubit(), Pauli::Z)
    }
}

/// Native-gate circuit: per step, XX then YY then ZZ bond groups (each an
/// even and an odd Rzz layer inside a basis change), then the Rz fields.
pub fn build_trotter_circuit(
    params: &HeisenbergParams,
    durations: &Durations,
) -> Result<TimedCircuit> {
    params.validate()?;
    let n = params.n_sites();
    let theta = 2.0 * params.j * params.delta_t;
    let layers = params.bond_layers();
    let mut gates = Vec::new();
    if params.k == 0 {
        // bare initial state; its preparation is taken as error-free
        let mut flip = NativeGate::ry(params.init_qubit(), std::f64::consts::PI);
        flip.noisy = false;
        gates.push(flip);
    }
    for step in 0..params.k {
        // XX: Ry(−π/2) maps Z to ±X; on the excited site the initial X is
        // absorbed by flipping the first rotation
        for q in 0..n {
            let a = if step == 0 && q == params.init_qubit() {
                FRAC_PI_2
            } else {
                -FRAC_PI_2
            };
            gates.push(NativeGate::ry(q, a));
        }
        for layer in &layers {
            gates.extend(layer.iter().map(|&(a, b)| NativeGate::rzz(a, b, theta)));
        }
        gates.extend((0..n).map(|q| NativeGate::ry(q, FRAC_PI_2)));
        // YY
        gates.extend((0..n).map(|q| NativeGate::rx(q, FRAC_PI_2)));
        for layer in &layers {
            gates.extend(layer.iter().map(|&(a, b)| NativeGate::rzz(a, b, theta)));
        }
        gates.extend((0..n).map(|q| NativeGate::rx(q, -FRAC_PI_2)));
        // ZZ
        for layer in &layers {
            gates.extend(layer.iter().map(|&(a, b)| NativeGate::rzz(a, b, theta)));
        }
        gates.extend((0..n).map(|q| NativeGate::rz(q, 2.0 * params.h[q] * params.delta_t)));
    }
    let mut c = TimedCircuit::new(n);
    for g in gates {
        let d = durations.of_gate(g.kind);
        c.gate(g.with_duration(d));
    }
    Ok(c)
}

/// `(∏_l e^{−i H_l δt})^K |ψ_init⟩` with every bond factor computed by a
/// dense matrix exponential.
pub fn ideal_state(params: &HeisenbergParams) -> Result<State> {
    params.validate()?;
    let n = params.n_sites();
    if n > IDEAL_STATE_CAP {
        return Err(Error::WidthCap {
            kind: "dense reference",
            width: n,
            cap: IDEAL_STATE_CAP,
        });
    }
    let mut s = State::basis(StateKind::Statevector, n, 1 << params.init_qubit())?;
    let bonds: Vec<(usize, usize)> = params.bond_layers().concat();
    let dt = params.delta_t;
    let bond_factor = |p: Pauli| {
        let pm = sim::pauli_matrix::<f64>(p);
        hermitian_expm(&pm.kron(&pm).scale(params.j.into()), dt)
    };
    let factors = [
        bond_factor(Pauli::X),
        bond_factor(Pauli::Y),
        bond_factor(Pauli::Z),
    ];
    let fields: Vec<_> = params
        .h
        .iter()
        .map(|&h| hermitian_expm(&sim::pauli_matrix::<f64>(Pauli::Z).scale(h.into()), dt))
        .collect();
    for _ in 0..params.k {
        for f in &factors {
            for &(a, b) in &bonds {
                s.apply_unitary(f, &[a, b])?;
            }
        }
        for (q, f) in fields.iter().enumerate() {
            s.apply_unitary(f, &[q])?;
        }
    }
    Ok(s)
}
