//! Unitary construction and statevector runs for circuits.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Circuit, CircuitOp, Wire};
use crate::bell::{bell_product, bilateral_parts, b_rotation, BellLabel, Party, Sign};
use crate::error::{invalid, Error, Result};
use crate::gates::{build_gate, equal_up_to_global_phase, ComplexMatrix, GateSpec, C64, ONE, ZERO};

/// Largest pair count for which full unitaries are built (64-dim).
pub const MAX_UNITARY_PAIRS: usize = 3;

const EQUIVALENCE_TOL: f64 = 1e-10;

/// Local gates making up one op, with the qubits they act on.
fn op_parts(op: &CircuitOp, n_pairs: usize) -> Result<Vec<(ComplexMatrix, Vec<usize>)>> {
    match op {
        CircuitOp::Measure(_) => Ok(Vec::new()),
        CircuitOp::Bilateral { kind, pairs } => bilateral_parts(*kind, pairs, n_pairs),
        CircuitOp::Gate { kind, wires } => {
            let u = build_gate(&GateSpec { kind: *kind, arity: wires.len() })?;
            Ok(vec![(u, wires.iter().map(|w| w.qubit(n_pairs)).collect())])
        }
    }
}

/// `(B^alpha_+)^2` on both halves of a pair; equal to `(B^alpha_-)^2`.
fn frame_parts(pair: usize, axis: crate::gates::Axis, n_pairs: usize) -> Result<Vec<(ComplexMatrix, Vec<usize>)>> {
    let b = b_rotation(axis, Sign::Plus);
    let sq = &b * &b;
    Ok(vec![
        (sq.clone(), vec![Wire::alice(pair).qubit(n_pairs)]),
        (sq, vec![Wire::bob(pair).qubit(n_pairs)]),
    ])
}

/// Every unitary step in time order, frames included.
fn steps(c: &Circuit) -> Result<Vec<Vec<(ComplexMatrix, Vec<usize>)>>> {
    let mut out = Vec::new();
    for i in 0..=c.ops.len() {
        for f in c.frames.iter().filter(|f| f.position == i) {
            out.push(frame_parts(f.pair, f.axis, c.n_pairs)?);
        }
        if let Some(op) = c.ops.get(i) {
            out.push(op_parts(op, c.n_pairs)?);
        }
    }
    Ok(out)
}

/// Applies a `2^k` gate to the listed qubits of a state (qubit 0 is the MSB).
fn apply_local(state: &mut [C64], u: &ComplexMatrix, qubits: &[usize], nq: usize) {
    let k = qubits.len();
    let masks: Vec<usize> = qubits.iter().map(|&q| 1 << (nq - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let offset = |sub: usize| -> usize {
        (0..k).filter(|&b| sub >> (k - 1 - b) & 1 == 1).map(|b| masks[b]).sum()
    };
    let offsets: Vec<usize> = (0..1 << k).map(offset).collect();
    let mut buf = vec![ZERO; 1 << k];
    for base in 0..state.len() {
        if base & all != 0 {
            continue;
        }
        for (j, &o) in offsets.iter().enumerate() {
            buf[j] = state[base + o];
        }
        for (i, &o) in offsets.iter().enumerate() {
            state[base + o] = (0..1 << k).map(|j| u[(i, j)] * buf[j]).sum();
        }
    }
}

/// Index permutation that moves physical pair `relabel[i]` to position `i`.
fn relabel_permutation(relabel: &[usize]) -> Vec<usize> {
    let n = relabel.len();
    let nq = 2 * n;
    let bit = |j: usize, q: usize| (j >> (nq - 1 - q)) & 1;
    (0..1usize << nq)
        .map(|j| {
            let mut out = 0;
            for (i, &src) in relabel.iter().enumerate() {
                for party in [Party::Alice, Party::Bob] {
                    let from = Wire { party, pair: src }.qubit(n);
                    let to = Wire { party, pair: i }.qubit(n);
                    out |= bit(j, from) << (nq - 1 - to);
                }
            }
            out
        })
        .collect()
}

/// Runs the unitary part of a circuit on a state; measurements are skipped
/// and the output relabeling is applied at the end.
pub fn simulate(c: &Circuit, init: &[C64]) -> Result<Vec<C64>> {
    let nq = 2 * c.n_pairs;
    if init.len() != 1 << nq {
        return Err(Error::DimensionMismatch { left: 1 << nq, right: init.len() });
    }
    let mut state = init.to_vec();
    for step in steps(c)? {
        for (u, qubits) in step {
            apply_local(&mut state, &u, &qubits, nq);
        }
    }
    Ok(apply_relabel(&state, &c.relabel))
}

fn apply_relabel(state: &[C64], relabel: &[usize]) -> Vec<C64> {
    let perm = relabel_permutation(relabel);
    let mut out = vec![ZERO; state.len()];
    for (j, &p) in perm.iter().enumerate() {
        out[p] = state[j];
    }
    out
}

/// The circuit with its measurements dropped. Measurements are terminal per
/// wire, so this is the unitary that precedes them.
pub fn measurement_free_prefix(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    out.ops.retain(|op| !matches!(op, CircuitOp::Measure(_)));
    for f in &mut out.frames {
        f.position -= c.ops[..f.position].iter().filter(|op| matches!(op, CircuitOp::Measure(_))).count();
    }
    out
}

/// Full unitary `P_relabel * U_ops`, frames included.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    if c.n_pairs > MAX_UNITARY_PAIRS {
        return Err(Error::UnsupportedSize { qubits: 2 * c.n_pairs, limit: 2 * MAX_UNITARY_PAIRS });
    }
    if c.ops.iter().any(|op| matches!(op, CircuitOp::Measure(_))) {
        return Err(Error::Precondition("circuit_unitary needs a measurement-free circuit".into()));
    }
    let dim = 1 << (2 * c.n_pairs);
    let mut data = vec![ZERO; dim * dim];
    for col in 0..dim {
        let mut e = vec![ZERO; dim];
        e[col] = ONE;
        let v = simulate(c, &e)?;
        for (row, z) in v.into_iter().enumerate() {
            data[row * dim + col] = z;
        }
    }
    ComplexMatrix::from_vec(dim, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub residual: f64,
}

/// Measured wires in logical labels, i.e. after undoing the relabeling.
fn logical_measured(c: &Circuit) -> BTreeSet<Wire> {
    c.measured_wires()
        .into_iter()
        .map(|w| {
            let logical = c.relabel.iter().position(|&p| p == w.pair).expect("relabel is a permutation");
            Wire { party: w.party, pair: logical }
        })
        .collect()
}

/// Compares measurement-free prefixes up to a global phase, with relabelings
/// and contraction frames composed in, and the measured wires after relabeling.
pub fn check_rewrite_equivalence(original: &Circuit, rewritten: &Circuit) -> Result<Equivalence> {
    if original.n_pairs != rewritten.n_pairs {
        return invalid("circuits have different pair counts");
    }
    let a = circuit_unitary(&measurement_free_prefix(original))?;
    let b = circuit_unitary(&measurement_free_prefix(rewritten))?;
    let fit = equal_up_to_global_phase(&b, &a, EQUIVALENCE_TOL)?;
    let same_measurements = logical_measured(original) == logical_measured(rewritten);
    Ok(Equivalence { equivalent: fit.equal && same_measurements, residual: fit.residual })
}

/// Runs the circuit on a Bell-product input and returns, for each pair with
/// both halves measured, the logical pair and the XOR of Alice's and Bob's
/// z outcomes. Errors if an outcome parity is not deterministic.
pub fn measured_parity(c: &Circuit, input: &[BellLabel]) -> Result<Vec<(usize, u8)>> {
    if input.len() != c.n_pairs {
        return Err(Error::DimensionMismatch { left: c.n_pairs, right: input.len() });
    }
    let mut physical = c.clone();
    physical.relabel = (0..c.n_pairs).collect();
    let state = simulate(&measurement_free_prefix(&physical), &bell_product(input))?;
    let nq = 2 * c.n_pairs;
    let measured = c.measured_wires();
    let mut out = Vec::new();
    for p in 0..c.n_pairs {
        if !(measured.contains(&Wire::alice(p)) && measured.contains(&Wire::bob(p))) {
            continue;
        }
        let (qa, qb) = (Wire::alice(p).qubit(c.n_pairs), Wire::bob(p).qubit(c.n_pairs));
        let odd: f64 = state
            .iter()
            .enumerate()
            .filter(|(j, _)| ((j >> (nq - 1 - qa)) ^ (j >> (nq - 1 - qb))) & 1 == 1)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        let parity = if odd < 1e-9 {
            0
        } else if odd > 1.0 - 1e-9 {
            1
        } else {
            return invalid(format!("pair {p} parity is random (P(odd) = {odd})"));
        };
        let logical = c.relabel.iter().position(|&x| x == p).expect("permutation");
        out.push((logical, parity));
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{bilateral_unitary, BilateralKind};
    use crate::gates::{embed, iswap, GateKind};

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2).unwrap();
        assert!(circuit_unitary(&c).unwrap().max_diff(&ComplexMatrix::identity(16)) < 1e-15);
    }

    #[test]
    fn single_biswap() {
        let c = Circuit::new(2).unwrap().with(CircuitOp::bilateral(BilateralKind::BiSwap, &[0, 1])).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let want = &embed(&iswap(), &[0, 1], 4).unwrap() * &embed(&iswap(), &[2, 3], 4).unwrap();
        assert!(u.max_diff(&want) < 1e-15);
        assert!(u.max_diff(&bilateral_unitary(BilateralKind::BiSwap, &[0, 1], 2).unwrap()) < 1e-15);
    }

    #[test]
    fn local_application_matches_embedding() {
        let c = Circuit::new(3)
            .unwrap()
            .with(CircuitOp::bilateral(BilateralKind::BCnot, &[2, 0]))
            .unwrap()
            .with(CircuitOp::Gate { kind: GateKind::XYEvolve(0.3), wires: vec![Wire::bob(1), Wire::alice(2)] })
            .unwrap();
        let u = circuit_unitary(&c).unwrap();
        let want = &embed(&crate::gates::xy_evolution(0.3).unwrap(), &[4, 2], 6).unwrap()
            * &bilateral_unitary(BilateralKind::BCnot, &[2, 0], 3).unwrap();
        assert!(u.max_diff(&want) < 1e-14);
    }

    #[test]
    fn relabel_is_pair_swap() {
        let mut c = Circuit::new(2).unwrap();
        c.set_relabel(vec![1, 0]).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let bswap = bilateral_unitary(BilateralKind::BSwap, &[0, 1], 2).unwrap();
        assert!(u.max_diff(&bswap) < 1e-15);
    }

    #[test]
    fn size_and_measurement_guards() {
        assert!(matches!(circuit_unitary(&Circuit::new(4).unwrap()), Err(Error::UnsupportedSize { .. })));
        let c = Circuit::new(1).unwrap().with(CircuitOp::Measure(Wire::alice(0))).unwrap();
        assert!(circuit_unitary(&c).is_err());
        assert!(circuit_unitary(&measurement_free_prefix(&c)).is_ok());
    }

    #[test]
    fn self_equivalence() {
        let c = Circuit::new(2).unwrap().with(CircuitOp::bilateral(BilateralKind::BCnot, &[0, 1])).unwrap();
        let e = check_rewrite_equivalence(&c, &c).unwrap();
        assert!(e.equivalent && e.residual < 1e-15);
    }

    #[test]
    fn bell_pair_parity() {
        let c = Circuit::new(1)
            .unwrap()
            .with(CircuitOp::Measure(Wire::alice(0)))
            .unwrap()
            .with(CircuitOp::Measure(Wire::bob(0)))
            .unwrap();
        for l in BellLabel::ALL {
            let want = if l.is_psi() { 1 } else { 0 };
            assert_eq!(measured_parity(&c, &[l]).unwrap(), vec![(0, want)]);
        }
    }
}
