//! Circuit IR over shared pairs, the BCNOT to BiSWAP rewrite passes, the
//! hashing and breeding templates and unitary-level equivalence checks.
//!
//! Wires are `A<k>`/`B<k>` (Alice's or Bob's half of pair `k`). Bilateral ops
//! expand to both parties' wires. The output relabeling maps logical pair `i`
//! to the physical pair `relabel[i]` holding it at the end of the circuit.

mod passes;
mod sim;
mod templates;
mod text;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bell::{wire, BilateralKind, Party};
use crate::error::{invalid, Error, Result};
use crate::gates::{Axis, GateKind};

pub use passes::{contract_rotations, insert_swaps, replace_bcnot, rewrite, Direction};
pub use sim::{
    check_rewrite_equivalence, circuit_unitary, measured_parity, measurement_free_prefix, simulate, Equivalence,
    MAX_UNITARY_PAIRS,
};
pub use templates::{breeding_template, hashing_parity, hashing_template, labels_from_bits, parse_bits, symbol_action, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Wire {
    pub party: Party,
    pub pair: usize,
}

impl Wire {
    pub fn alice(pair: usize) -> Self {
        Wire { party: Party::Alice, pair }
    }

    pub fn bob(pair: usize) -> Self {
        Wire { party: Party::Bob, pair }
    }

    /// Qubit index in the `2n`-qubit register.
    pub fn qubit(self, n_pairs: usize) -> usize {
        wire(self.party, self.pair, n_pairs)
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.party.letter(), self.pair)
    }
}

impl FromStr for Wire {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let party = match s.chars().next() {
            Some('A') => Party::Alice,
            Some('B') => Party::Bob,
            _ => return invalid(format!("bad wire {s:?}")),
        };
        let pair = s[1..].parse().map_err(|_| Error::InvalidArgument(format!("bad wire {s:?}")))?;
        Ok(Wire { party, pair })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitOp {
    /// A plain gate on explicit wires. One-qubit kinds use `qubit: 0`.
    Gate { kind: GateKind, wires: Vec<Wire> },
    Measure(Wire),
    Bilateral { kind: BilateralKind, pairs: Vec<usize> },
}

impl CircuitOp {
    pub fn bilateral(kind: BilateralKind, pairs: &[usize]) -> Self {
        CircuitOp::Bilateral { kind, pairs: pairs.to_vec() }
    }

    pub fn wires(&self) -> Vec<Wire> {
        match self {
            CircuitOp::Gate { wires, .. } => wires.clone(),
            CircuitOp::Measure(w) => vec![*w],
            CircuitOp::Bilateral { kind: BilateralKind::UnilateralPi { party, .. }, pairs } => {
                vec![Wire { party: *party, pair: pairs[0] }]
            }
            CircuitOp::Bilateral { pairs, .. } => {
                pairs.iter().flat_map(|&p| [Wire::alice(p), Wire::bob(p)]).collect()
            }
        }
    }

    pub fn touches_pair(&self, pair: usize) -> bool {
        self.wires().iter().any(|w| w.pair == pair)
    }

    fn map_pairs(&self, f: impl Fn(usize) -> usize) -> Self {
        match self {
            CircuitOp::Gate { kind, wires } => CircuitOp::Gate {
                kind: *kind,
                wires: wires.iter().map(|w| Wire { party: w.party, pair: f(w.pair) }).collect(),
            },
            CircuitOp::Measure(w) => CircuitOp::Measure(Wire { party: w.party, pair: f(w.pair) }),
            CircuitOp::Bilateral { kind, pairs } => {
                CircuitOp::Bilateral { kind: *kind, pairs: pairs.iter().map(|&p| f(p)).collect() }
            }
        }
    }
}

fn gate_arity(kind: &GateKind) -> usize {
    match kind {
        GateKind::Rot { .. } | GateKind::Hadamard { .. } => 1,
        _ => 2,
    }
}

/// A `(B^alpha)^2` removed by contraction. It is a bilateral Pauli, so it only
/// flips signs of Bell states; `position` is the op index it precedes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub position: usize,
    pub pair: usize,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_pairs: usize,
    ops: Vec<CircuitOp>,
    relabel: Vec<usize>,
    frames: Vec<FrameRecord>,
}

impl Circuit {
    pub fn new(n_pairs: usize) -> Result<Self> {
        if n_pairs == 0 {
            return invalid("circuit needs at least one pair");
        }
        Ok(Circuit { n_pairs, ops: Vec::new(), relabel: (0..n_pairs).collect(), frames: Vec::new() })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn relabel(&self) -> &[usize] {
        &self.relabel
    }

    pub fn frames(&self) -> &[FrameRecord] {
        &self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: CircuitOp) -> Result<()> {
        self.validate(&op)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn with(mut self, op: CircuitOp) -> Result<Self> {
        self.push(op)?;
        Ok(self)
    }

    pub fn set_relabel(&mut self, perm: Vec<usize>) -> Result<()> {
        check_permutation(&perm, self.n_pairs)?;
        self.relabel = perm;
        Ok(())
    }

    pub fn push_frame(&mut self, frame: FrameRecord) -> Result<()> {
        if frame.pair >= self.n_pairs || frame.position > self.ops.len() {
            return invalid(format!("frame {frame:?} out of range"));
        }
        self.frames.push(frame);
        Ok(())
    }

    fn validate(&self, op: &CircuitOp) -> Result<()> {
        match op {
            CircuitOp::Gate { kind, wires } => {
                if wires.len() != gate_arity(kind) {
                    return invalid(format!("{kind:?} needs {} wire(s)", gate_arity(kind)));
                }
                if let GateKind::Rot { qubit, .. } | GateKind::Hadamard { qubit } = kind {
                    if *qubit != 0 {
                        return invalid("one-qubit gate must address qubit 0 of its wire list");
                    }
                }
            }
            CircuitOp::Bilateral { kind, pairs } => {
                if pairs.len() != kind.pair_arity() {
                    return invalid(format!("{kind:?} needs {} pair(s)", kind.pair_arity()));
                }
            }
            CircuitOp::Measure(_) => {}
        }
        let wires = op.wires();
        for (i, w) in wires.iter().enumerate() {
            if w.pair >= self.n_pairs {
                return invalid(format!("wire {w} outside {} pairs", self.n_pairs));
            }
            if wires[..i].contains(w) {
                return invalid(format!("wire {w} repeated"));
            }
            if self.ops.iter().any(|o| matches!(o, CircuitOp::Measure(m) if m == w)) {
                return invalid(format!("wire {w} already measured"));
            }
        }
        Ok(())
    }

    pub fn measured_wires(&self) -> Vec<Wire> {
        self.ops
            .iter()
            .filter_map(|o| match o {
                CircuitOp::Measure(w) => Some(*w),
                _ => None,
            })
            .collect()
    }

    pub fn count_bilateral(&self, pred: impl Fn(BilateralKind) -> bool) -> usize {
        self.ops.iter().filter(|o| matches!(o, CircuitOp::Bilateral { kind, .. } if pred(*kind))).count()
    }

    pub fn gate_counts(&self) -> GateCounts {
        GateCounts::of(self)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return invalid(format!("relabeling has {} entries, expected {n}", perm.len()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return invalid(format!("relabeling {perm:?} is not a permutation"));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Gate tallies. `two_qubit_native` counts per-party native two-qubit
/// interactions: a CNOT or CPF costs two iSWAPs, a SWAP three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub bcnot: usize,
    pub bswap: usize,
    pub biswap: usize,
    pub bcpf: usize,
    pub bilateral_rotations: usize,
    pub unilateral: usize,
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub measurements: usize,
    pub cnot_class: usize,
    pub two_qubit_native: usize,
}

impl GateCounts {
    pub fn of(c: &Circuit) -> Self {
        let mut g = GateCounts::default();
        for op in &c.ops {
            match op {
                CircuitOp::Measure(_) => g.measurements += 1,
                CircuitOp::Bilateral { kind, .. } => match kind {
                    BilateralKind::BCnot => {
                        g.bcnot += 1;
                        g.cnot_class += 1;
                        g.two_qubit_native += 2;
                    }
                    BilateralKind::BSwap => {
                        g.bswap += 1;
                        g.cnot_class += 1;
                        g.two_qubit_native += 3;
                    }
                    BilateralKind::BCpf => {
                        g.bcpf += 1;
                        g.cnot_class += 1;
                        g.two_qubit_native += 2;
                    }
                    BilateralKind::BiSwap => {
                        g.biswap += 1;
                        g.two_qubit_native += 1;
                    }
                    BilateralKind::Rot { .. } => g.bilateral_rotations += 1,
                    BilateralKind::UnilateralPi { .. } => g.unilateral += 1,
                },
                CircuitOp::Gate { kind, .. } => {
                    if gate_arity(kind) == 1 {
                        g.one_qubit += 1;
                        continue;
                    }
                    g.two_qubit += 1;
                    g.two_qubit_native += match kind {
                        GateKind::Cnot | GateKind::Cpf => 2,
                        GateKind::Swap => 3,
                        _ => 1,
                    };
                    if matches!(kind, GateKind::Cnot | GateKind::Cpf | GateKind::Swap) {
                        g.cnot_class += 1;
                    }
                }
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteReport {
    pub direction: Direction,
    pub before: GateCounts,
    pub after: GateCounts,
    pub frames: Vec<FrameRecord>,
    pub relabel: Vec<usize>,
    pub equivalence: Option<Equivalence>,
}

impl RewriteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
