//! Circuit builders for the three virtual-distillation layouts, their
//! classical post-processing and resource accounting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{ArtificialGate, Block, BlockKind, Event, MeasureKind, Op, TimedCircuit};
use crate::gates::{decompose_controlled_pauli, decompose_cswap, decompose_hadamard, GateSequence};
use crate::network::{
    ancilla_count, ancilla_node, register_node, BsmFold, Lowering, NetworkMode, RemoteOpPlan,
};
use crate::noise::{schedule, Durations};
use crate::sim::{Pauli, PauliString};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Implementation {
    /// Cyclic rotation: all copies in parallel, register 1 as the pivot.
    Cr,
    /// Qubit-efficient cyclic rotation: two registers, re-prepared in turn.
    Qecr,
    /// Brickwork: two transversal layers behind a GHZ-shared ancilla.
    Bw,
}

impl Implementation {
    pub const ALL: [Implementation; 3] =
        [Implementation::Cr, Implementation::Qecr, Implementation::Bw];
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Implementation::Cr => "CR",
            Implementation::Qecr => "QECR",
            Implementation::Bw => "BW",
        })
    }
}

impl FromStr for Implementation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cr" => Ok(Implementation::Cr),
            "qecr" => Ok(Implementation::Qecr),
            "bw" => Ok(Implementation::Bw),
            _ => Err(Error::InvalidParameter(format!(
                "unknown implementation `{s}`"
            ))),
        }
    }
}

/// Everything a builder needs.
#[derive(Debug, Clone)]
pub struct VdPlan {
    pub implementation: Implementation,
    pub n: usize,
    /// One numerator term, or the identity for the denominator circuit.
    pub sigma: PauliString,
    /// Prepares one `N`-qubit copy.
    pub state_prep: Arc<TimedCircuit>,
    pub network: NetworkMode,
    pub bsm_fold: BsmFold,
    /// Count Bell-pair generation time toward idling.
    pub charge_bell_generation: bool,
    pub durations: Durations,
    /// Register that receives controlled-σ; `None` picks the default.
    pub sigma_register: Option<usize>,
}

impl VdPlan {
    pub fn new(
        implementation: Implementation,
        n: usize,
        sigma: PauliString,
        state_prep: Arc<TimedCircuit>,
    ) -> Self {
        Self {
            implementation,
            n,
            sigma,
            state_prep,
            network: NetworkMode::Folded,
            bsm_fold: BsmFold::Exact,
            charge_bell_generation: false,
            durations: Durations::default(),
            sigma_register: None,
        }
    }

    pub fn data_width(&self) -> usize {
        self.state_prep.width()
    }

    pub fn with_sigma(&self, sigma: PauliString) -> Self {
        Self {
            sigma,
            ..self.clone()
        }
    }

    fn validate(&self, expected: Implementation) -> Result<()> {
        if self.implementation != expected {
            return Err(Error::InvalidParameter(format!(
                "plan is for {}, not {expected}",
                self.implementation
            )));
        }
        if self.n < 2 {
            return Err(Error::TooFewCopies { n: self.n, min: 2 });
        }
        if self.data_width() == 0 {
            return Err(Error::InvalidParameter(
                "copies need at least one qubit".into(),
            ));
        }
        if self.sigma.width() != self.data_width() {
            return Err(Error::WidthMismatch {
                expected: self.data_width(),
                found: self.sigma.width(),
            });
        }
        Ok(())
    }
}

/// Bits of one BSM. Each side is the parity of its listed qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsmOutcome {
    /// X-basis (control) side.
    pub x_bits: Vec<usize>,
    /// Z-basis (target) side.
    pub z_bits: Vec<usize>,
}

impl BsmOutcome {
    pub fn local(q1: usize, q2: usize) -> Self {
        Self {
            x_bits: vec![q1],
            z_bits: vec![q2],
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.x_bits.iter().chain(&self.z_bits).copied()
    }
}

/// How measured bits turn into a ±1 sample.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ShotRule {
    pub ancillas: Vec<usize>,
    pub bsm_pairs: Vec<BsmOutcome>,
}

impl ShotRule {
    pub fn measured(&self) -> BTreeSet<usize> {
        self.ancillas
            .iter()
            .copied()
            .chain(self.bsm_pairs.iter().flat_map(|p| p.qubits()))
            .collect()
    }
}

/// `∏ (−1)^ancilla × ∏ (−1 iff both BSM bits are 1)`.
pub fn shot_value(rule: &ShotRule, bits: &BTreeMap<usize, bool>) -> Result<i8> {
    let bit = |q: &usize| bits.get(q).copied().ok_or(Error::MissingBit(*q));
    let parity =
        |qs: &[usize]| -> Result<bool> { qs.iter().try_fold(false, |acc, q| Ok(acc ^ bit(q)?)) };
    let mut odd = false;
    for q in &rule.ancillas {
        odd ^= bit(q)?;
    }
    for pair in &rule.bsm_pairs {
        odd ^= parity(&pair.x_bits)? && parity(&pair.z_bits)?;
    }
    Ok(if odd { -1 } else { 1 })
}

/// Where the builder put everything.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Layout {
    pub registers: Vec<Vec<usize>>,
    pub ancillas: Vec<usize>,
    /// Network and receiving qubits added by explicit lowering.
    pub network: Vec<usize>,
    /// (qubit, node) for every network qubit, in creation order.
    pub network_nodes: Vec<(usize, usize)>,
}

impl Layout {
    /// Registers plus ancillas.
    pub fn core_qubits(&self) -> usize {
        self.registers.iter().map(Vec::len).sum::<usize>() + self.ancillas.len()
    }
}

#[derive(Debug, Clone)]
pub struct VdCircuit {
    pub implementation: Implementation,
    pub n: usize,
    pub circuit: TimedCircuit,
    pub rule: ShotRule,
    pub layout: Layout,
    pub remote: RemoteOpPlan,
}

struct Builder<'a> {
    plan: &'a VdPlan,
    c: TimedCircuit,
    low: Lowering,
    /// Node currently holding each qubit.
    node: BTreeMap<usize, usize>,
    layout: Layout,
    rule: ShotRule,
    next_id: u32,
    d_rho: f64,
}

impl<'a> Builder<'a> {
    fn new(plan: &'a VdPlan, registers: usize, ancillas: usize) -> Result<Self> {
        let n_q = plan.data_width();
        let width = registers * n_q + ancillas;
        let layout = Layout {
            registers: (0..registers)
                .map(|r| (r * n_q..(r + 1) * n_q).collect())
                .collect(),
            ancillas: (registers * n_q..width).collect(),
            network: Vec::new(),
            network_nodes: Vec::new(),
        };
        let mut node = BTreeMap::new();
        for (r, reg) in layout.registers.iter().enumerate() {
            for &q in reg {
                node.insert(q, register_node(plan.implementation, r));
            }
        }
        for (k, &a) in layout.ancillas.iter().enumerate() {
            node.insert(a, ancilla_node(plan.implementation, plan.n, k));
        }
        Ok(Self {
            plan,
            c: TimedCircuit::new(width),
            low: Lowering::new(
                plan.network,
                plan.bsm_fold,
                plan.durations,
                plan.charge_bell_generation,
            ),
            node,
            layout,
            rule: ShotRule::default(),
            // lowering blocks use ids from 0; keep builder ids disjoint
            next_id: 1 << 20,
            d_rho: schedule(&plan.state_prep)?.makespan,
        })
    }

    fn block(&mut self, kind: BlockKind, layer: u32) -> Option<Block> {
        let id = self.next_id;
        self.next_id += 1;
        Some(Block { kind, id, layer })
    }

    fn gates(&mut self, seq: GateSequence, block: Option<Block>) {
        for g in seq.into_gates() {
            let d = self.plan.durations.of_gate(g.kind);
            self.c
                .add_event(Event::new(Op::Gate(g.with_duration(d)), d).in_block(block));
        }
    }

    fn prepare(&mut self, r: usize, mid_circuit: bool, layer: u32) {
        let block = self.block(BlockKind::CopyPrep, layer);
        let d = if mid_circuit {
            self.d_rho + self.plan.durations.mid_circuit_prep
        } else {
            self.d_rho
        };
        let register = self.layout.registers[r].clone();
        for &q in &register {
            self.node
                .insert(q, register_node(self.plan.implementation, r));
        }
        self.c.add_event(
            Event::new(
                Op::PrepareCopy {
                    register,
                    circuit: self.plan.state_prep.clone(),
                    mid_circuit,
                    flip: 0.0,
                },
                d,
            )
            .in_block(block),
        );
    }

    fn barrier(&mut self) {
        let qubits = (0..self.layout.core_qubits()).collect();
        self.c.add_event(Event::instant(Op::Barrier { qubits }));
    }

    fn hadamard_ancillas(&mut self) {
        let g = self.layout.ancillas.len();
        if g == 1 {
            let block = self.block(BlockKind::AncillaPrep, 0);
            self.gates(decompose_hadamard(self.layout.ancillas[0]), block);
        } else {
            let qubits = self.layout.ancillas.clone();
            let nodes: Vec<usize> = qubits.iter().map(|q| self.node[q]).collect();
            self.low.ghz(&mut self.c, &qubits, &nodes);
        }
    }

    fn controlled_sigma(&mut self, anc: usize, r: usize) {
        let block = self.block(BlockKind::ControlledSigma, 0);
        let reg = self.layout.registers[r].clone();
        let ops: Vec<Pauli> = self.plan.sigma.ops().to_vec();
        for (q, p) in ops.into_iter().enumerate() {
            if p != Pauli::I {
                let seq = decompose_controlled_pauli(p, anc, reg[q])
                    .expect("ancilla is outside the register");
                self.gates(seq, block);
            }
        }
    }

    /// Brings `q` to `dest` by teleportation when it lives elsewhere.
    fn bring(&mut self, q: usize, dest: usize, layer: u32) -> usize {
        let from = self.node[&q];
        if from == dest {
            return q;
        }
        let out = self.low.teleport(&mut self.c, q, from, dest, layer);
        self.node.insert(out, dest);
        out
    }

    /// Transversal C-SWAP between register qubits `a` (at the ancilla)
    /// and `b`, teleporting `b` in. Returns the qubits now holding `b`.
    fn cswap_layer(&mut self, anc: usize, a: &[usize], b: &[usize], layer: u32) -> Vec<usize> {
        let dest = self.node[&anc];
        let mut moved = Vec::with_capacity(b.len());
        for (&qa, &qb) in a.iter().zip(b) {
            let qb = self.bring(qb, dest, layer);
            let block = self.block(BlockKind::Cswap, layer);
            self.gates(
                decompose_cswap(anc, qa, qb).expect("distinct qubits"),
                block,
            );
            moved.push(qb);
        }
        moved
    }

    fn measure_ancillas(&mut self) {
        for a in self.layout.ancillas.clone() {
            let block = self.block(BlockKind::AncillaMeasure, 0);
            self.gates(decompose_hadamard(a), block);
            self.c.add_event(
                Event::new(
                    Op::Measure {
                        qubit: a,
                        flip: 0.0,
                        kind: MeasureKind::Local,
                    },
                    self.plan.durations.detection,
                )
                .in_block(block),
            );
            self.rule.ancillas.push(a);
        }
    }

    fn bsm_layer(&mut self, a: &[usize], b: &[usize], layer: u32) {
        for (&q1, &q2) in a.iter().zip(b) {
            let (n1, n2) = (self.node[&q1], self.node[&q2]);
            let outcome = self.low.bsm(&mut self.c, q1, q2, n1, n2, layer);
            self.rule.bsm_pairs.push(outcome);
        }
    }

    fn finish(mut self) -> VdCircuit {
        self.layout.network = self.low.extra_qubits();
        self.layout.network_nodes = self.low.network_qubits().to_vec();
        VdCircuit {
            implementation: self.plan.implementation,
            n: self.plan.n,
            circuit: self.c,
            rule: self.rule,
            layout: self.layout,
            remote: self.low.plan,
        }
    }
}

/// Cyclic rotation: swap register 1 with registers 2..n−1 in turn, then a
/// destructive BSM layer between registers 1 and n.
pub fn build_cr(plan: &VdPlan) -> Result<VdCircuit> {
    plan.validate(Implementation::Cr)?;
    let n = plan.n;
    let mut b = Builder::new(plan, n, 1)?;
    for r in 0..n {
        b.prepare(r, false, 0);
    }
    b.barrier();
    b.hadamard_ancillas();
    let anc = b.layout.ancillas[0];
    b.controlled_sigma(anc, plan.sigma_register.unwrap_or(0));
    let pivot = b.layout.registers[0].clone();
    for r in 1..n - 1 {
        let reg = b.layout.registers[r].clone();
        b.cswap_layer(anc, &pivot, &reg, r as u32);
    }
    b.measure_ancillas();
    let last = b.layout.registers[n - 1].clone();
    b.bsm_layer(&pivot, &last, n as u32);
    Ok(b.finish())
}

/// Two registers; the second is reset and re-prepared for every copy
/// beyond the second, so the first idles through each preparation.
pub fn build_qecr(plan: &VdPlan) -> Result<VdCircuit> {
    plan.validate(Implementation::Qecr)?;
    let n = plan.n;
    let mut b = Builder::new(plan, 2, 1)?;
    b.prepare(0, false, 0);
    b.prepare(1, false, 0);
    b.barrier();
    b.hadamard_ancillas();
    let anc = b.layout.ancillas[0];
    b.controlled_sigma(anc, plan.sigma_register.unwrap_or(0).min(1));
    let held = b.layout.registers[0].clone();
    let other = b.layout.registers[1].clone();
    for k in 1..n - 1 {
        b.cswap_layer(anc, &held, &other, k as u32);
        b.prepare(1, true, k as u32);
    }
    b.measure_ancillas();
    b.bsm_layer(&held, &other, n as u32);
    Ok(b.finish())
}

/// Brickwork: C-SWAPs between registers (2k, 2k+1) controlled by ancilla
/// k, then BSMs between registers (2k−1, 2k) (1-based).
pub fn build_bw(plan: &VdPlan) -> Result<VdCircuit> {
    plan.validate(Implementation::Bw)?;
    let n = plan.n;
    let g = ancilla_count(Implementation::Bw, n);
    let mut b = Builder::new(plan, n, g)?;
    for r in 0..n {
        b.prepare(r, false, 0);
    }
    b.barrier();
    b.hadamard_ancillas();
    let anc = b.layout.ancillas.clone();
    let default_sigma = if n == 2 { 0 } else { 1 };
    b.controlled_sigma(anc[0], plan.sigma_register.unwrap_or(default_sigma));
    // holders[r] are the qubits currently carrying register r
    let mut holders = b.layout.registers.clone();
    if n >= 3 {
        for (k, &a) in anc.iter().enumerate() {
            let (r1, r2) = (2 * k + 1, 2 * k + 2);
            let (q1, q2) = (holders[r1].clone(), holders[r2].clone());
            holders[r2] = b.cswap_layer(a, &q1, &q2, 1);
        }
    }
    b.measure_ancillas();
    for k in 0..n / 2 {
        let (q1, q2) = (holders[2 * k].clone(), holders[2 * k + 1].clone());
        b.bsm_layer(&q1, &q2, 2);
    }
    Ok(b.finish())
}

pub fn build(plan: &VdPlan) -> Result<VdCircuit> {
    match plan.implementation {
        Implementation::Cr => build_cr(plan),
        Implementation::Qecr => build_qecr(plan),
        Implementation::Bw => build_bw(plan),
    }
}

/// A standalone local BSM on qubits `q1`, `q2` of a `width`-qubit register.
pub fn build_bsm(
    q1: usize,
    q2: usize,
    width: usize,
    durations: &Durations,
) -> Result<(TimedCircuit, BsmOutcome)> {
    if q1 == q2 {
        return Err(Error::DuplicateTarget(q1));
    }
    let mut c = TimedCircuit::new(width.max(q1.max(q2) + 1));
    let low = Lowering::new(NetworkMode::Folded, BsmFold::Exact, *durations, false);
    low.local_bsm(
        &mut c,
        q1,
        q2,
        (MeasureKind::Local, MeasureKind::Local),
        None,
    );
    Ok((c, BsmOutcome::local(q1, q2)))
}

/// Adds noiseless Toffolis (and parity CNOTs for split BSM bits) that fold
/// every BSM sign into the first ancilla, so `⊗ Z` on the ancillas reads
/// out the shot value.
pub fn insert_artificial_gates(vd: &VdCircuit) -> Result<(TimedCircuit, PauliString)> {
    let rule = &vd.rule;
    let Some(&target) = rule.ancillas.first() else {
        return Err(Error::InvalidParameter("shot rule has no ancilla".into()));
    };
    let mut last_measure: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, e) in vd.circuit.events().iter().enumerate() {
        if let Op::Measure { qubit, .. } = e.op {
            last_measure.insert(qubit, i);
        }
    }
    let at = |q: &usize| last_measure.get(q).copied().ok_or(Error::MissingBit(*q));
    let mut pending: BTreeMap<usize, Vec<ArtificialGate>> = BTreeMap::new();
    let anc_at = at(&target)?;
    for pair in &rule.bsm_pairs {
        let mut index = anc_at;
        for q in pair.qubits() {
            index = index.max(at(&q)?);
        }
        let gates = pending.entry(index).or_default();
        for side in [&pair.x_bits, &pair.z_bits] {
            for &q in &side[1..] {
                gates.push(ArtificialGate::Cnot {
                    control: q,
                    target: side[0],
                });
            }
        }
        gates.push(ArtificialGate::Toffoli {
            c1: pair.x_bits[0],
            c2: pair.z_bits[0],
            target,
        });
    }
    let mut out = TimedCircuit::new(vd.circuit.width());
    for (i, e) in vd.circuit.events().iter().enumerate() {
        out.add_event(e.clone());
        for g in pending.remove(&i).unwrap_or_default() {
            out.add_event(Event::instant(Op::Artificial(g)));
        }
    }
    let observable = PauliString::on(vd.circuit.width(), &rule.ancillas, Pauli::Z);
    Ok((out, observable))
}

/// The measured observable without artificial gates:
/// `⊗ Z_anc × ∏ ½(I + Z_x + Z_z − Z_x Z_z)` with parities as Z products.
pub fn full_observable(vd: &VdCircuit) -> Vec<PauliString> {
    let w = vd.circuit.width();
    let z_on = |qs: &[usize]| {
        let mut ops = vec![Pauli::I; w];
        for &q in qs {
            ops[q] = Pauli::Z;
        }
        ops
    };
    let mul = |a: &[Pauli], b: &[Pauli]| -> Vec<Pauli> {
        // only I and Z occur, so the product is the symmetric difference
        a.iter()
            .zip(b)
            .map(|(x, y)| if x == y { Pauli::I } else { Pauli::Z })
            .collect()
    };
    let mut terms: Vec<(Vec<Pauli>, f64)> = vec![(z_on(&vd.rule.ancillas), 1.0)];
    for pair in &vd.rule.bsm_pairs {
        let zx = z_on(&pair.x_bits);
        let zz = z_on(&pair.z_bits);
        let zxz = mul(&zx, &zz);
        let factors = [(vec![Pauli::I; w], 0.5), (zx, 0.5), (zz, 0.5), (zxz, -0.5)];
        terms = terms
            .iter()
            .flat_map(|(ops, c)| factors.iter().map(move |(f, fc)| (mul(ops, f), c * fc)))
            .collect();
    }
    terms
        .into_iter()
        .map(|(ops, c)| PauliString::new(ops, c).expect("finite coefficient"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResourceMode {
    Table,
    AsBuilt,
}

impl fmt::Display for ResourceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResourceMode::Table => "table",
            ResourceMode::AsBuilt => "as-built",
        })
    }
}

impl FromStr for ResourceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ResourceMode::Table),
            "as-built" => Ok(ResourceMode::AsBuilt),
            _ => Err(Error::InvalidParameter(format!(
                "unknown resource mode `{s}`"
            ))),
        }
    }
}

/// `rho·d_ρ + s·d_S + b·d_B + sigma·d_σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DepthExpr {
    pub rho: usize,
    pub s: usize,
    pub b: usize,
    pub sigma: usize,
}

impl fmt::Display for DepthExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, sym) in [
            (self.rho, "d_ρ"),
            (self.s, "d_S"),
            (self.b, "d_B"),
            (self.sigma, "d_σ"),
        ] {
            if k == 0 {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            if k > 1 {
                write!(f, "{k}")?;
            }
            f.write_str(sym)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceReport {
    pub implementation: Implementation,
    pub n: usize,
    pub data_width: usize,
    pub mode: ResourceMode,
    pub registers: usize,
    pub qubits: usize,
    pub cswap: usize,
    pub bsm: usize,
    pub bell_pairs: usize,
    pub depth: DepthExpr,
}

impl ResourceReport {
    pub const CSV_HEADER: [&'static str; 10] = [
        "impl",
        "n",
        "N",
        "mode",
        "registers",
        "qubits",
        "cswap",
        "bsm",
        "bellpairs",
        "depth",
    ];

    pub fn csv_record(&self) -> [String; 10] {
        [
            self.implementation.to_string(),
            self.n.to_string(),
            self.data_width.to_string(),
            self.mode.to_string(),
            self.registers.to_string(),
            self.qubits.to_string(),
            self.cswap.to_string(),
            self.bsm.to_string(),
            self.bell_pairs.to_string(),
            self.depth.to_string(),
        ]
    }
}

/// Closed-form counts for `table` mode.
fn table_counts(
    implementation: Implementation,
    n: usize,
    nq: usize,
) -> (usize, usize, usize, usize, DepthExpr) {
    let g = (n - 1) / 2;
    match implementation {
        Implementation::Qecr => (
            2,
            2 * nq + 1,
            (n - 1) * nq,
            nq,
            DepthExpr {
                rho: n - 1,
                s: n - 2,
                b: 1,
                sigma: 0,
            },
        ),
        Implementation::Cr => (
            n,
            n * nq + 1,
            (n - 1) * nq,
            nq,
            DepthExpr {
                rho: 1,
                s: n - 2,
                b: 1,
                sigma: 1,
            },
        ),
        Implementation::Bw => (
            n,
            n * nq + g,
            g * nq,
            (n / 2) * nq,
            DepthExpr {
                rho: 1,
                s: 1,
                b: 1,
                sigma: 1,
            },
        ),
    }
}

/// Counts read back from the block tags of a built circuit.
pub fn count_built(vd: &VdCircuit, data_width: usize) -> ResourceReport {
    let mut ids: BTreeMap<BlockKind, BTreeSet<u32>> = BTreeMap::new();
    let mut layers: BTreeMap<BlockKind, BTreeSet<u32>> = BTreeMap::new();
    let mut preps: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for e in vd.circuit.events() {
        if let Some(b) = e.block {
            ids.entry(b.kind).or_default().insert(b.id);
            layers.entry(b.kind).or_default().insert(b.layer);
        }
        if let Op::PrepareCopy { register, .. } = &e.op {
            *preps.entry(register.clone()).or_default() += 1;
        }
    }
    let count = |m: &BTreeMap<BlockKind, BTreeSet<u32>>, k| m.get(&k).map_or(0, BTreeSet::len);
    ResourceReport {
        implementation: vd.implementation,
        n: vd.n,
        data_width,
        mode: ResourceMode::AsBuilt,
        registers: vd.layout.registers.len(),
        qubits: vd.layout.core_qubits(),
        cswap: count(&ids, BlockKind::Cswap),
        bsm: count(&ids, BlockKind::Bsm),
        bell_pairs: vd.remote.total_bell_pairs(),
        depth: DepthExpr {
            rho: preps.values().copied().max().unwrap_or(0),
            s: count(&layers, BlockKind::Cswap),
            b: count(&layers, BlockKind::Bsm),
            sigma: usize::from(count(&ids, BlockKind::ControlledSigma) > 0),
        },
    }
}

/// Resource counts for `n` copies of an `data_width`-qubit state.
pub fn count_resources(
    implementation: Implementation,
    n: usize,
    data_width: usize,
    mode: ResourceMode,
) -> Result<ResourceReport> {
    if n == 0 {
        return Err(Error::TooFewCopies { n, min: 1 });
    }
    if data_width == 0 {
        return Err(Error::InvalidParameter(
            "copies need at least one qubit".into(),
        ));
    }
    if n == 1 {
        return Ok(ResourceReport {
            implementation,
            n,
            data_width,
            mode,
            registers: 1,
            qubits: data_width,
            cswap: 0,
            bsm: 0,
            bell_pairs: 0,
            depth: DepthExpr {
                rho: 1,
                ..DepthExpr::default()
            },
        });
    }
    match mode {
        ResourceMode::Table => {
            let (registers, qubits, cswap, bsm, depth) =
                table_counts(implementation, n, data_width);
            let ghz_links = ((n - 1) / 2).saturating_sub(1);
            let ghz_links = if implementation == Implementation::Bw {
                ghz_links
            } else {
                0
            };
            Ok(ResourceReport {
                implementation,
                n,
                data_width,
                mode,
                registers,
                qubits,
                cswap,
                bsm,
                bell_pairs: cswap + bsm + ghz_links,
                depth,
            })
        }
        ResourceMode::AsBuilt => {
            let sigma = PauliString::single(data_width, 0, Pauli::Z);
            let prep = Arc::new(TimedCircuit::new(data_width));
            let vd = build(&VdPlan::new(implementation, n, sigma, prep))?;
            Ok(count_built(&vd, data_width))
        }
    }
}
