//! Bell-basis algebra for shared pairs.
//!
//! Wire order for `n` shared pairs is Alice's qubits of pairs `0..n` followed
//! by Bob's, with Alice's pair 0 the most significant bit. For two pairs the
//! source pair S is pair 0 and the target T is pair 1, so the basis index is
//! `8 a_S + 4 a_T + 2 b_S + b_T`.
//!
//! Bilateral rotations use Pauli matrices written in the (up, down) order,
//! which in the computational (`|0> = down`) indices reads
//! `sigma_x = X`, `sigma_y = -Y`, `sigma_z = -Z`.

mod tables;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{self, c, embed, Axis, ComplexMatrix, C64, I, ONE, ZERO};

pub use tables::{
    compare_bennett, compare_deutsch, compare_rotations, generate_table, parse_bennett, parse_deutsch,
    generate_bennett_with, parse_rotations, reference_bennett, reference_deutsch, reference_rotations, replacement_residual, replacement_sequence, BennettRow, DeutschRow,
    Mismatch, ProductEntry, RotationRow, Table, TableKind,
};

/// Classification tolerance.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    /// Column order used by the rotation table.
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];

    /// `(amplitude bit, phase bit)`: Phi+ = 00, Psi+ = 10, Phi- = 01, Psi- = 11.
    pub fn bits(self) -> (u8, u8) {
        match self {
            BellLabel::PhiPlus => (0, 0),
            BellLabel::PsiPlus => (1, 0),
            BellLabel::PhiMinus => (0, 1),
            BellLabel::PsiMinus => (1, 1),
        }
    }

    pub fn from_bits(a: u8, p: u8) -> BellLabel {
        match (a & 1, p & 1) {
            (0, 0) => BellLabel::PhiPlus,
            (1, 0) => BellLabel::PsiPlus,
            (0, 1) => BellLabel::PhiMinus,
            _ => BellLabel::PsiMinus,
        }
    }

    pub fn is_psi(self) -> bool {
        self.bits().0 == 1
    }

    /// Same family, opposite sign.
    pub fn flip_sign(self) -> BellLabel {
        let (a, p) = self.bits();
        BellLabel::from_bits(a, p ^ 1)
    }

    pub fn ascii(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "Phi+",
            BellLabel::PhiMinus => "Phi-",
            BellLabel::PsiPlus => "Psi+",
            BellLabel::PsiMinus => "Psi-",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellLabel::PhiPlus => "Φ+",
            BellLabel::PhiMinus => "Φ-",
            BellLabel::PsiPlus => "Ψ+",
            BellLabel::PsiMinus => "Ψ-",
        };
        f.write_str(s)
    }
}

impl FromStr for BellLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Phi+" | "Φ+" | "phi+" => Ok(BellLabel::PhiPlus),
            "Phi-" | "Φ-" | "phi-" => Ok(BellLabel::PhiMinus),
            "Psi+" | "Ψ+" | "psi+" => Ok(BellLabel::PsiPlus),
            "Psi-" | "Ψ-" | "psi-" => Ok(BellLabel::PsiMinus),
            other => invalid(format!("unknown Bell label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasedBell {
    pub label: BellLabel,
    pub phase: C64,
}

impl PhasedBell {
    pub fn new(label: BellLabel, phase: C64) -> Result<Self> {
        if (phase.norm() - 1.0).abs() > 1e-12 {
            return invalid("phase must have unit modulus");
        }
        Ok(PhasedBell { label, phase })
    }
}

/// Renders a unit phase from {1, -1, i, -i} compactly, otherwise as a polar angle.
pub fn phase_str(z: C64) -> String {
    const CANON: [(C64, &str); 4] = [(ONE, "1"), (C64::new(-1.0, 0.0), "-1"), (I, "i"), (C64::new(0.0, -1.0), "-i")];
    for (v, s) in CANON {
        if (z - v).norm() < 1e-9 {
            return s.to_string();
        }
    }
    format!("e^{{{:.6}i}}", z.arg())
}

pub fn parse_phase(s: &str) -> Result<C64> {
    match s.trim() {
        "1" | "+1" | "" | "+" => Ok(ONE),
        "-1" | "-" => Ok(-ONE),
        "i" | "+i" => Ok(I),
        "-i" => Ok(-I),
        other => invalid(format!("unknown phase {other:?}")),
    }
}

/// Pair state in the (Alice, Bob) two-qubit basis with Alice as the MSB.
pub fn bell_vector(label: BellLabel) -> [C64; 4] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    match label {
        BellLabel::PhiPlus => [h, ZERO, ZERO, h],
        BellLabel::PhiMinus => [-h, ZERO, ZERO, h],
        BellLabel::PsiPlus => [ZERO, h, h, ZERO],
        BellLabel::PsiMinus => [ZERO, -h, h, ZERO],
    }
}

/// Product of `labels.len()` Bell pairs in the n-pair wire order.
pub fn bell_product(labels: &[BellLabel]) -> Vec<C64> {
    let n = labels.len();
    let mut out = vec![ZERO; 1 << (2 * n)];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut amp = ONE;
        for (k, &l) in labels.iter().enumerate() {
            let a = (idx >> (2 * n - 1 - k)) & 1;
            let b = (idx >> (n - 1 - k)) & 1;
            amp *= bell_vector(l)[2 * a + b];
            if amp == ZERO {
                break;
            }
        }
        *slot = amp;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPairState {
    amps: [C64; 16],
}

impl TwoPairState {
    pub fn new(amps: [C64; 16]) -> Result<Self> {
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return invalid(format!("state norm {norm} is not 1"));
        }
        Ok(TwoPairState { amps })
    }

    pub fn bell(s: BellLabel, t: BellLabel) -> Self {
        let v = bell_product(&[s, t]);
        let mut amps = [ZERO; 16];
        amps.copy_from_slice(&v);
        TwoPairState { amps }
    }

    pub fn amplitudes(&self) -> &[C64; 16] {
        &self.amps
    }

    pub fn scaled(&self, z: C64) -> Self {
        let mut amps = self.amps;
        for a in amps.iter_mut() {
            *a *= z;
        }
        TwoPairState { amps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn letter(self) -> char {
        match self {
            Party::Alice => 'A',
            Party::Bob => 'B',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairSel {
    S,
    T,
    Both,
}

/// Bilateral operations. Two-pair kinds act from the first pair (source) to
/// the second (target).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BilateralKind {
    Rot { axis: Axis, sign: Sign },
    BiSwap,
    BSwap,
    BCnot,
    BCpf,
    /// `e^{i pi sigma / 2}` on one party's qubit only.
    UnilateralPi { axis: Axis, party: Party },
}

impl BilateralKind {
    pub fn pair_arity(self) -> usize {
        match self {
            BilateralKind::Rot { .. } | BilateralKind::UnilateralPi { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BilateralOp {
    pub kind: BilateralKind,
    pub sel: PairSel,
}

impl BilateralOp {
    pub fn rot(axis: Axis, sign: Sign, sel: PairSel) -> Self {
        BilateralOp { kind: BilateralKind::Rot { axis, sign }, sel }
    }

    pub fn two(kind: BilateralKind) -> Self {
        BilateralOp { kind, sel: PairSel::Both }
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        if self.kind.pair_arity() == 2 {
            if self.sel != PairSel::Both {
                return invalid("two-pair operation needs both pairs selected");
            }
            return bilateral_unitary(self.kind, &[0, 1], 2);
        }
        match self.sel {
            PairSel::S => bilateral_unitary(self.kind, &[0], 2),
            PairSel::T => bilateral_unitary(self.kind, &[1], 2),
            PairSel::Both => {
                Ok(&bilateral_unitary(self.kind, &[0], 2)? * &bilateral_unitary(self.kind, &[1], 2)?)
            }
        }
    }
}

/// Pauli operator in the (up, down) frame, written in computational indices.
pub fn spin_pauli(axis: Axis) -> ComplexMatrix {
    match axis {
        Axis::X => gates::pauli(Axis::X),
        Axis::Y => gates::pauli(Axis::Y).scale(-ONE),
        Axis::Z => gates::pauli(Axis::Z).scale(-ONE),
    }
}

/// Single-qubit factor of `B^axis_sign`.
pub fn b_rotation(axis: Axis, sign: Sign) -> ComplexMatrix {
    match axis {
        // phase gate: up -> 1, down -> -+i
        Axis::Z => ComplexMatrix::from_diag(&[c(0.0, -sign.value()), ONE]),
        _ => {
            let h = FRAC_1_SQRT_2;
            &ComplexMatrix::identity(2).scale(c(h, 0.0)) + &spin_pauli(axis).scale(c(0.0, sign.value() * h))
        }
    }
}

/// `e^{i pi sigma / 2} = i sigma` in the spin frame.
pub fn unilateral_pi(axis: Axis) -> ComplexMatrix {
    spin_pauli(axis).scale(I)
}

/// CNOT whose control fires on `down`, the spin-frame CNOT.
pub fn spin_cnot() -> ComplexMatrix {
    let xx = gates::pauli(Axis::X).kron(&gates::pauli(Axis::X));
    &(&xx * &gates::cnot()) * &xx
}

pub fn spin_cpf() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[-ONE, ONE, ONE, ONE])
}

pub fn wire(party: Party, pair: usize, n_pairs: usize) -> usize {
    match party {
        Party::Alice => pair,
        Party::Bob => n_pairs + pair,
    }
}

/// Local pieces of a bilateral op: each party's gate and the wires it acts on.
pub fn bilateral_parts(kind: BilateralKind, pairs: &[usize], n_pairs: usize) -> Result<Vec<(ComplexMatrix, Vec<usize>)>> {
    if pairs.len() != kind.pair_arity() {
        return invalid(format!("{kind:?} acts on {} pair(s), got {}", kind.pair_arity(), pairs.len()));
    }
    if pairs.iter().any(|&p| p >= n_pairs) {
        return invalid("pair index out of range");
    }
    if pairs.len() == 2 && pairs[0] == pairs[1] {
        return invalid("two-pair operation needs distinct pairs");
    }
    let on = |party| pairs.iter().map(|&p| wire(party, p, n_pairs)).collect::<Vec<_>>();
    let both = |u: ComplexMatrix| vec![(u.clone(), on(Party::Alice)), (u, on(Party::Bob))];
    Ok(match kind {
        BilateralKind::Rot { axis, sign } => both(b_rotation(axis, sign)),
        BilateralKind::UnilateralPi { axis, party } => vec![(unilateral_pi(axis), on(party))],
        BilateralKind::BiSwap => both(gates::iswap()),
        BilateralKind::BSwap => both(gates::swap()),
        BilateralKind::BCnot => both(spin_cnot()),
        BilateralKind::BCpf => both(spin_cpf()),
    })
}

/// Full `4^n`-dim unitary of one bilateral kind acting on the listed pairs.
pub fn bilateral_unitary(kind: BilateralKind, pairs: &[usize], n_pairs: usize) -> Result<ComplexMatrix> {
    let nq = 2 * n_pairs;
    let mut out = ComplexMatrix::identity(1 << nq);
    for (u, wires) in bilateral_parts(kind, pairs, n_pairs)? {
        out = &embed(&u, &wires, nq)? * &out;
    }
    Ok(out)
}

pub fn apply_bilateral(op: &BilateralOp, state: &TwoPairState) -> Result<TwoPairState> {
    let v = op.matrix()?.apply(state.amplitudes())?;
    let mut amps = [ZERO; 16];
    amps.copy_from_slice(&v);
    Ok(TwoPairState { amps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classified {
    /// Phase carried on the S slot; T phase is 1.
    Product(PhasedBell, PhasedBell),
    NotProduct,
}

impl Classified {
    pub fn entry(&self) -> Option<ProductEntry> {
        match *self {
            Classified::Product(s, t) => Some(ProductEntry { phase: s.phase, s: s.label, t: t.label }),
            Classified::NotProduct => None,
        }
    }
}

pub fn classify_bell_product(state: &TwoPairState, tol: f64) -> Classified {
    for s in BellLabel::ALL {
        for t in BellLabel::ALL {
            let basis = bell_product(&[s, t]);
            let ov = gates::inner(&basis, state.amplitudes());
            if (ov.norm() - 1.0).abs() > tol {
                continue;
            }
            let rest = state.amplitudes().iter().zip(&basis).map(|(x, y)| (x - ov * y).norm()).fold(0.0, f64::max);
            if rest < tol {
                return Classified::Product(
                    PhasedBell { label: s, phase: ov / ov.norm() },
                    PhasedBell { label: t, phase: ONE },
                );
            }
        }
    }
    Classified::NotProduct
}

/// Single-pair classification: label and phase of a 4-vector.
pub fn classify_bell(v: &[C64], tol: f64) -> Option<PhasedBell> {
    for l in BellLabel::ALL {
        let b = bell_vector(l);
        let ov = gates::inner(&b, v);
        if (ov.norm() - 1.0).abs() < tol {
            return Some(PhasedBell { label: l, phase: ov / ov.norm() });
        }
    }
    None
}
