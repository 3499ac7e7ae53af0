//! Node topologies, remote-operation lowering and the folded network mode.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Block, BlockKind, Event, MeasureKind, Op, TimedCircuit};
use crate::gates::{decompose_controlled_pauli, decompose_hadamard};
use crate::noise::Durations;
use crate::sim::Pauli;
use crate::vd::{BsmOutcome, Implementation};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkMode {
    /// Network qubits are left out and link errors folded onto data qubits.
    #[default]
    Folded,
    /// Every Bell pair, helper measurement and correction is simulated.
    Explicit,
}

/// How a folded remote BSM charges its Bell-pair error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BsmFold {
    /// Depolarising on the target qubit before a local BSM; equivalent
    /// to the explicit protocol.
    #[default]
    Exact,
    /// Independent readout flips of `p/3` (control) and `2p/3` (target).
    IndependentFlips,
}

/// Readout flip probabilities used by [`BsmFold::IndependentFlips`].
pub fn folded_bsm_flip_probabilities(p_bell: f64) -> (f64, f64) {
    (p_bell / 3.0, 2.0 * p_bell / 3.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub data_qubits: usize,
    pub has_ancilla: bool,
    pub network_qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Topology {
    nodes: Vec<Node>,
    links: BTreeSet<(usize, usize)>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Topology {
    pub fn new(nodes: Vec<Node>, links: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut t = Topology {
            nodes: Vec::new(),
            links: BTreeSet::new(),
        };
        for n in nodes {
            if t.node(n.id).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate node {}", n.id)));
            }
            t.nodes.push(n);
        }
        for (a, b) in links {
            t.add_link(a, b)?;
        }
        Ok(t)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn add_link(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b || self.node(a).is_none() || self.node(b).is_none() {
            return Err(Error::NoLink(a, b));
        }
        self.links.insert(key(a, b));
        Ok(())
    }

    pub fn remove_link(&mut self, a: usize, b: usize) -> bool {
        self.links.remove(&key(a, b))
    }

    pub fn has_link(&self, a: usize, b: usize) -> bool {
        self.links.contains(&key(a, b))
    }

    pub fn check_link(&self, a: usize, b: usize) -> Result<()> {
        if self.has_link(a, b) {
            Ok(())
        } else {
            Err(Error::NoLink(a, b))
        }
    }

    pub fn degree(&self, id: usize) -> usize {
        self.links
            .iter()
            .filter(|(a, b)| *a == id || *b == id)
            .count()
    }

    /// Checks that `ids` are linked consecutively.
    pub fn check_path(&self, ids: &[usize]) -> Result<()> {
        if ids.windows(2).all(|w| self.has_link(w[0], w[1])) {
            Ok(())
        } else {
            Err(Error::NotPathLinked(ids.to_vec()))
        }
    }

    /// Parses the line format
    ///
    /// ```text
    /// # comment
    /// node 0 ancilla data=4 network=1
    /// node 1 data=4
    /// link 0 1
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| Error::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            let num = |w: Option<&str>, what: &str| -> Result<usize> {
                let w = w.ok_or_else(|| err(format!("missing {what}")))?;
                w.parse()
                    .map_err(|_| err(format!("`{w}` is not a valid {what}")))
            };
            match words.next() {
                Some("node") => {
                    let id = num(words.next(), "node id")?;
                    let mut node = Node {
                        id,
                        data_qubits: 0,
                        has_ancilla: false,
                        network_qubits: 1,
                    };
                    for w in words {
                        match w.split_once('=') {
                            None if w == "ancilla" => node.has_ancilla = true,
                            Some(("data", v)) => node.data_qubits = num(Some(v), "data count")?,
                            Some(("network", v)) => {
                                node.network_qubits = num(Some(v), "network count")?
                            }
                            _ => return Err(err(format!("unknown node attribute `{w}`"))),
                        }
                    }
                    nodes.push((line, node));
                }
                Some("link") => {
                    let a = num(words.next(), "node id")?;
                    let b = num(words.next(), "node id")?;
                    if let Some(extra) = words.next() {
                        return Err(err(format!("unexpected `{extra}` after link")));
                    }
                    links.push((line, a, b));
                }
                Some(other) => {
                    return Err(err(format!("expected `node` or `link`, found `{other}`")))
                }
                None => unreachable!("empty lines are skipped"),
            }
        }
        if nodes.is_empty() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: "topology declares no nodes".into(),
            });
        }
        let mut t = Topology::default();
        for (line, n) in nodes {
            if t.node(n.id).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("node {} declared twice", n.id),
                });
            }
            t.nodes.push(n);
        }
        for (line, a, b) in links {
            t.add_link(a, b).map_err(|_| Error::Parse {
                line,
                message: format!("link {a}-{b} names an unknown node or is a self-loop"),
            })?;
        }
        Ok(t)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            write!(f, "node {}", n.id)?;
            if n.has_ancilla {
                write!(f, " ancilla")?;
            }
            writeln!(f, " data={} network={}", n.data_qubits, n.network_qubits)?;
        }
        for (a, b) in &self.links {
            writeln!(f, "link {a} {b}")?;
        }
        Ok(())
    }
}

/// Node hosting register `r` (0-based). Every register has its own node,
/// except that QECR reuses node 1 for all re-prepared copies.
pub fn register_node(implementation: Implementation, r: usize) -> usize {
    match implementation {
        Implementation::Qecr => r.min(1),
        _ => r,
    }
}

/// Node hosting ancilla `k` (0-based).
pub fn ancilla_node(implementation: Implementation, n: usize, k: usize) -> usize {
    match implementation {
        Implementation::Cr | Implementation::Qecr => 0,
        // ancilla k sits with register 2(k+1), i.e. index 2k+1
        Implementation::Bw if n >= 3 => 2 * k + 1,
        Implementation::Bw => 0,
    }
}

/// Number of ancillas the builders use.
pub fn ancilla_count(implementation: Implementation, n: usize) -> usize {
    match implementation {
        Implementation::Bw => ((n - 1) / 2).max(1),
        _ => 1,
    }
}

/// Connectivity needed to run `implementation` with `n` copies.
pub fn required_topology(
    implementation: Implementation,
    n: usize,
    data_width: usize,
) -> Result<Topology> {
    if n < 2 {
        return Err(Error::TooFewCopies { n, min: 2 });
    }
    let node_count = match implementation {
        Implementation::Qecr => 2,
        _ => n,
    };
    let g = ancilla_count(implementation, n);
    let ancilla_nodes: BTreeSet<usize> =
        (0..g).map(|k| ancilla_node(implementation, n, k)).collect();
    let nodes = (0..node_count)
        .map(|id| Node {
            id,
            data_qubits: data_width,
            has_ancilla: ancilla_nodes.contains(&id),
            network_qubits: 1,
        })
        .collect();
    let mut links = Vec::new();
    match implementation {
        Implementation::Cr => links.extend((1..n).map(|k| (0, k))),
        Implementation::Qecr => links.push((0, 1)),
        Implementation::Bw if n == 2 => links.push((0, 1)),
        Implementation::Bw => {
            // control k (register index 2k+1) teleports in register 2k+2
            // and shares a BSM with control k+1; control 0 also serves
            // register 0, and for even n the last control serves register n−1
            for k in 0..g {
                let c = 2 * k + 1;
                links.push((c, c + 1));
                if k + 1 < g {
                    links.push((c, c + 2));
                }
            }
            links.push((0, 1));
            if n.is_multiple_of(2) {
                links.push((2 * g - 1, n - 1));
            }
        }
    }
    Topology::new(nodes, links)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Deficiency {
    MissingNode(usize),
    MissingLink(usize, usize),
    MissingAncilla(usize),
    InsufficientDataQubits {
        node: usize,
        needed: usize,
        available: usize,
    },
}

impl fmt::Display for Deficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deficiency::MissingNode(n) => write!(f, "missing node {n}"),
            Deficiency::MissingLink(a, b) => write!(f, "missing link {a}-{b}"),
            Deficiency::MissingAncilla(n) => write!(f, "node {n} needs an ancilla qubit"),
            Deficiency::InsufficientDataQubits {
                node,
                needed,
                available,
            } => write!(
                f,
                "node {node} holds {available} data qubits, needs {needed}"
            ),
        }
    }
}

/// Finds a node matching that embeds `required` into `available`.
///
/// On failure the deficiencies are reported against the identity mapping
/// (required node `i` on available node `i`).
pub fn validate_topology(
    available: &Topology,
    required: &Topology,
) -> Result<BTreeMap<usize, usize>, Vec<Deficiency>> {
    let req = &required.nodes;
    let fits = |r: &Node, a: &Node| {
        (!r.has_ancilla || a.has_ancilla)
            && (r.data_qubits == 0 || a.data_qubits == 0 || a.data_qubits >= r.data_qubits)
    };
    // most-constrained nodes first
    let mut order: Vec<usize> = (0..req.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(required.degree(req[i].id)));
    let mut assign: Vec<Option<usize>> = vec![None; req.len()];
    let mut used = vec![false; available.nodes.len()];

    fn search(
        depth: usize,
        order: &[usize],
        req: &Topology,
        avail: &Topology,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        fits: &dyn Fn(&Node, &Node) -> bool,
    ) -> bool {
        let Some(&i) = order.get(depth) else {
            return true;
        };
        let r = &req.nodes[i];
        for (j, a) in avail.nodes.iter().enumerate() {
            if used[j] || !fits(r, a) || avail.degree(a.id) < req.degree(r.id) {
                continue;
            }
            let consistent = req
                .nodes
                .iter()
                .enumerate()
                .all(|(k, other)| match assign[k] {
                    Some(m) if req.has_link(r.id, other.id) => {
                        avail.has_link(a.id, avail.nodes[m].id)
                    }
                    _ => true,
                });
            if !consistent {
                continue;
            }
            assign[i] = Some(j);
            used[j] = true;
            if search(depth + 1, order, req, avail, assign, used, fits) {
                return true;
            }
            assign[i] = None;
            used[j] = false;
        }
        false
    }

    if search(
        0,
        &order,
        required,
        available,
        &mut assign,
        &mut used,
        &fits,
    ) {
        return Ok(assign
            .iter()
            .enumerate()
            .map(|(i, j)| (req[i].id, available.nodes[j.expect("complete")].id))
            .collect());
    }
    let mut out = BTreeSet::new();
    for r in req {
        match available.node(r.id) {
            None => {
                out.insert(Deficiency::MissingNode(r.id));
            }
            Some(a) => {
                if r.has_ancilla && !a.has_ancilla {
                    out.insert(Deficiency::MissingAncilla(r.id));
                }
                if r.data_qubits > 0 && a.data_qubits > 0 && a.data_qubits < r.data_qubits {
                    out.insert(Deficiency::InsufficientDataQubits {
                        node: r.id,
                        needed: r.data_qubits,
                        available: a.data_qubits,
                    });
                }
            }
        }
    }
    for (a, b) in required.links() {
        if !available.has_link(a, b) {
            out.insert(Deficiency::MissingLink(a, b));
        }
    }
    if out.is_empty() {
        // the identity mapping works link-wise but node attributes do not
        // admit any matching; report the most constrained node
        out.insert(Deficiency::MissingNode(req[order[0]].id));
    }
    Err(out.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RemoteOpKind {
    Teleport,
    RemoteBsm,
    GhzLink,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteOp {
    pub kind: RemoteOpKind,
    pub link: (usize, usize),
    pub qubits: Vec<usize>,
}

/// Remote operations in circuit order plus Bell pairs consumed per link.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RemoteOpPlan {
    pub ops: Vec<RemoteOp>,
    pub bell_budget: BTreeMap<(usize, usize), usize>,
}

impl RemoteOpPlan {
    pub fn record(&mut self, kind: RemoteOpKind, a: usize, b: usize, qubits: Vec<usize>) {
        let link = key(a, b);
        self.ops.push(RemoteOp { kind, link, qubits });
        *self.bell_budget.entry(link).or_default() += 1;
    }

    pub fn total_bell_pairs(&self) -> usize {
        self.bell_budget.values().sum()
    }

    /// Checks every operation against `topology`.
    pub fn check(&self, topology: &Topology) -> Result<()> {
        for op in &self.ops {
            topology.check_link(op.link.0, op.link.1)?;
        }
        Ok(())
    }
}

/// Emits remote operations into a circuit, allocating network qubits on
/// demand in explicit mode.
#[derive(Debug, Clone)]
pub struct Lowering {
    pub mode: NetworkMode,
    pub fold: BsmFold,
    pub durations: Durations,
    /// Charge Bell-pair generation time to the waiting qubits.
    pub charge_bell_generation: bool,
    pub plan: RemoteOpPlan,
    /// `(qubit, node)` for every simulated network qubit, in allocation order.
    network_qubits: Vec<(usize, usize)>,
    /// Qubits created to receive teleported states.
    received: Vec<usize>,
    next_id: u32,
}

impl Lowering {
    pub fn new(
        mode: NetworkMode,
        fold: BsmFold,
        durations: Durations,
        charge_bell_generation: bool,
    ) -> Self {
        Self {
            mode,
            fold,
            durations,
            charge_bell_generation,
            plan: RemoteOpPlan::default(),
            network_qubits: Vec::new(),
            received: Vec::new(),
            next_id: 0,
        }
    }

    pub fn network_qubits(&self) -> &[(usize, usize)] {
        &self.network_qubits
    }

    /// Every qubit added to the circuit, network or receiving slot.
    pub fn extra_qubits(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.network_qubits.iter().map(|&(q, _)| q).collect();
        v.extend(&self.received);
        v.sort_unstable();
        v
    }

    fn bell_time(&self) -> f64 {
        if self.charge_bell_generation {
            self.durations.bell_pair
        } else {
            0.0
        }
    }

    fn grow(c: &mut TimedCircuit) -> usize {
        let q = c.width();
        c.grow(q + 1);
        q
    }

    /// A network qubit on `node`. Each node owns one network qubit, so a
    /// fresh one waits until the node's previous one has been measured.
    fn fresh(&mut self, c: &mut TimedCircuit, node: usize) -> usize {
        let q = Self::grow(c);
        if let Some(&(prev, _)) = self.network_qubits.iter().rev().find(|(_, n)| *n == node) {
            c.add_event(Event::instant(Op::Barrier {
                qubits: vec![prev, q],
            }));
        }
        self.network_qubits.push((q, node));
        q
    }

    fn block(&mut self, kind: BlockKind, layer: u32) -> Option<Block> {
        let id = self.next_id;
        self.next_id += 1;
        Some(Block { kind, id, layer })
    }

    fn gates(&self, c: &mut TimedCircuit, seq: crate::gates::GateSequence, block: Option<Block>) {
        for g in seq.into_gates() {
            let d = self.durations.of_gate(g.kind);
            c.add_event(Event::new(Op::Gate(g.with_duration(d)), d).in_block(block));
        }
    }

    fn measure(&self, c: &mut TimedCircuit, qubit: usize, kind: MeasureKind, block: Option<Block>) {
        c.add_event(
            Event::new(
                Op::Measure {
                    qubit,
                    flip: 0.0,
                    kind,
                },
                self.durations.detection,
            )
            .in_block(block),
        );
    }

    fn bell_pair(&self, c: &mut TimedCircuit, a: usize, b: usize, block: Option<Block>) {
        c.add_event(
            Event::new(Op::GhzPrep { qubits: vec![a, b] }, self.bell_time()).in_block(block),
        );
    }

    /// CNOT(q1→q2), H(q1), then Z readout of both; the caller pairs the bits.
    pub fn local_bsm(
        &self,
        c: &mut TimedCircuit,
        q1: usize,
        q2: usize,
        kinds: (MeasureKind, MeasureKind),
        block: Option<Block>,
    ) {
        self.gates(
            c,
            decompose_controlled_pauli(Pauli::X, q1, q2).expect("distinct"),
            block,
        );
        self.gates(c, decompose_hadamard(q1), block);
        self.measure(c, q1, kinds.0, block);
        self.measure(c, q2, kinds.1, block);
    }

    /// Moves the state of `q` from node `from` to node `to`; returns the
    /// qubit that now holds it.
    pub fn teleport(
        &mut self,
        c: &mut TimedCircuit,
        q: usize,
        from: usize,
        to: usize,
        layer: u32,
    ) -> usize {
        let block = self.block(BlockKind::Teleport, layer);
        self.plan.record(RemoteOpKind::Teleport, from, to, vec![q]);
        match self.mode {
            NetworkMode::Folded => {
                c.add_event(
                    Event::new(Op::FoldedLink { qubit: q }, self.bell_time()).in_block(block),
                );
                q
            }
            NetworkMode::Explicit => {
                let a1 = self.fresh(c, from);
                let q2 = Self::grow(c);
                self.received.push(q2);
                self.bell_pair(c, a1, q2, block);
                self.gates(
                    c,
                    decompose_controlled_pauli(Pauli::X, q, a1).expect("distinct"),
                    block,
                );
                self.gates(c, decompose_hadamard(q), block);
                self.measure(c, q, MeasureKind::Local, block);
                self.measure(c, a1, MeasureKind::Local, block);
                for (ctrl, p) in [(a1, Pauli::X), (q, Pauli::Z)] {
                    c.add_event(
                        Event::instant(Op::Feedback {
                            controls: vec![ctrl],
                            pauli: p,
                            target: q2,
                        })
                        .in_block(block),
                    );
                }
                q2
            }
        }
    }

    /// BSM between `q1` (node `n1`) and `q2` (node `n2`), local when the
    /// nodes coincide.
    pub fn bsm(
        &mut self,
        c: &mut TimedCircuit,
        q1: usize,
        q2: usize,
        n1: usize,
        n2: usize,
        layer: u32,
    ) -> BsmOutcome {
        let block = self.block(BlockKind::Bsm, layer);
        if n1 == n2 {
            self.local_bsm(c, q1, q2, (MeasureKind::Local, MeasureKind::Local), block);
            return BsmOutcome::local(q1, q2);
        }
        self.plan
            .record(RemoteOpKind::RemoteBsm, n1, n2, vec![q1, q2]);
        match (self.mode, self.fold) {
            (NetworkMode::Folded, BsmFold::Exact) => {
                c.add_event(
                    Event::new(Op::FoldedLink { qubit: q2 }, self.bell_time()).in_block(block),
                );
                self.local_bsm(c, q1, q2, (MeasureKind::Local, MeasureKind::Local), block);
                BsmOutcome::local(q1, q2)
            }
            (NetworkMode::Folded, BsmFold::IndependentFlips) => {
                if self.charge_bell_generation {
                    c.add_event(Event::new(
                        Op::Barrier {
                            qubits: vec![q1, q2],
                        },
                        0.0,
                    ));
                }
                self.local_bsm(
                    c,
                    q1,
                    q2,
                    (MeasureKind::FoldedBsmControl, MeasureKind::FoldedBsmTarget),
                    block,
                );
                BsmOutcome::local(q1, q2)
            }
            (NetworkMode::Explicit, _) => {
                let a1 = self.fresh(c, n1);
                let a2 = self.fresh(c, n2);
                self.bell_pair(c, a1, a2, block);
                self.local_bsm(c, q1, a1, (MeasureKind::Local, MeasureKind::Local), block);
                self.local_bsm(c, a2, q2, (MeasureKind::Local, MeasureKind::Local), block);
                BsmOutcome {
                    x_bits: vec![q1, a2],
                    z_bits: vec![a1, q2],
                }
            }
        }
    }

    /// GHZ state across `qubits`, which live on the path `nodes`.
    pub fn ghz(&mut self, c: &mut TimedCircuit, qubits: &[usize], nodes: &[usize]) {
        let block = self.block(BlockKind::AncillaPrep, 0);
        for w in nodes.windows(2) {
            self.plan
                .record(RemoteOpKind::GhzLink, w[0], w[1], Vec::new());
        }
        match self.mode {
            NetworkMode::Folded => {
                c.add_event(
                    Event::new(
                        Op::GhzPrep {
                            qubits: qubits.to_vec(),
                        },
                        self.bell_time(),
                    )
                    .in_block(block),
                );
            }
            NetworkMode::Explicit => {
                // Bell pairs (q1,q2), (h2,q3), (h3,q4), …; fuse at each
                // middle node and correct downstream qubits by parity
                let k = qubits.len();
                let helpers: Vec<usize> = (1..k.saturating_sub(1))
                    .map(|i| self.fresh(c, nodes[i]))
                    .collect();
                self.bell_pair(c, qubits[0], qubits[1], block);
                for (i, &h) in helpers.iter().enumerate() {
                    self.bell_pair(c, h, qubits[i + 2], block);
                }
                for (i, &h) in helpers.iter().enumerate() {
                    self.gates(
                        c,
                        decompose_controlled_pauli(Pauli::X, qubits[i + 1], h).expect("distinct"),
                        block,
                    );
                    self.measure(c, h, MeasureKind::Local, block);
                }
                for j in 2..k {
                    c.add_event(
                        Event::instant(Op::Feedback {
                            controls: helpers[..j - 1].to_vec(),
                            pauli: Pauli::X,
                            target: qubits[j],
                        })
                        .in_block(block),
                    );
                }
            }
        }
    }
}

/// A standalone lowered fragment.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub circuit: TimedCircuit,
    /// Qubit holding the payload afterwards (teleport) or the BSM bits.
    pub output: Option<usize>,
    pub outcome: Option<BsmOutcome>,
    pub plan: RemoteOpPlan,
}

/// Teleports qubit 0 of a `width`-qubit payload from node `from` to node `to`.
pub fn lower_teleport(
    topology: &Topology,
    from: usize,
    to: usize,
    width: usize,
    mode: NetworkMode,
    durations: Durations,
) -> Result<Fragment> {
    topology.check_link(from, to)?;
    let mut c = TimedCircuit::new(width);
    let mut l = Lowering::new(mode, BsmFold::Exact, durations, false);
    let out = l.teleport(&mut c, 0, from, to, 0);
    Ok(Fragment {
        circuit: c,
        output: Some(out),
        outcome: None,
        plan: l.plan,
    })
}

/// Remote BSM between qubits 0 and 1 of a `width`-qubit payload.
pub fn lower_remote_bsm(
    topology: &Topology,
    n1: usize,
    n2: usize,
    width: usize,
    mode: NetworkMode,
    fold: BsmFold,
    durations: Durations,
) -> Result<Fragment> {
    topology.check_link(n1, n2)?;
    let mut c = TimedCircuit::new(width.max(2));
    let mut l = Lowering::new(mode, fold, durations, false);
    let outcome = l.bsm(&mut c, 0, 1, n1, n2, 0);
    Ok(Fragment {
        circuit: c,
        output: None,
        outcome: Some(outcome),
        plan: l.plan,
    })
}

/// GHZ state on qubits `0..nodes.len()`, one per node along a path.
pub fn lower_ghz(
    topology: &Topology,
    nodes: &[usize],
    mode: NetworkMode,
    durations: Durations,
) -> Result<Fragment> {
    if nodes.len() < 2 {
        return Err(Error::InvalidParameter(
            "a GHZ state needs at least two qubits".into(),
        ));
    }
    topology.check_path(nodes)?;
    let qubits: Vec<usize> = (0..nodes.len()).collect();
    let mut c = TimedCircuit::new(nodes.len());
    let mut l = Lowering::new(mode, BsmFold::Exact, durations, false);
    l.ghz(&mut c, &qubits, nodes);
    Ok(Fragment {
        circuit: c,
        output: None,
        outcome: None,
        plan: l.plan,
    })
}
