//! Gate constructors and phase-aware equivalence checks.
//!
//! Conventions: two-qubit basis `|00>,|01>,|10>,|11>` with qubit 0 as the most
//! significant (left) tensor factor, `|0> = down`, `|1> = up`. Qubit indices
//! in this crate are 0-based, so the "qubit 1" of the usual notation is
//! index 0 here.
//!
//! `rot(axis, theta)` is `exp(+i theta sigma / 2)`; the quarter-turn
//! `e^{i pi sigma / 4}` is `rot(axis, PI / 2)`.

mod matrix;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use matrix::{c, cis, inner, kron_vec, norm_sqr, ComplexMatrix, C64, I, ONE, ZERO};

use crate::error::{invalid, Error, Result};

/// Tolerance used for unitarity and identity checks.
pub const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_letter(ch: char) -> Option<Axis> {
        match ch.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

pub fn pauli(axis: Axis) -> ComplexMatrix {
    match axis {
        Axis::X => ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]),
        Axis::Y => ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]]),
        Axis::Z => ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, -ONE]]),
    }
}

/// `exp(+i theta sigma_axis / 2)` on one qubit.
pub fn rot(axis: Axis, theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    &ComplexMatrix::identity(2).scale(c(co, 0.0)) + &pauli(axis).scale(c(0.0, s))
}

pub fn hadamard() -> ComplexMatrix {
    let h = c(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[[h, h], [h, -h]])
}

/// Embeds a `2^k`-dim operator acting on `targets` into an `n`-qubit space.
/// `targets[0]` is the most significant qubit of `u`'s own index.
pub fn embed(u: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix> {
    let k = targets.len();
    if u.dim() != 1 << k {
        return Err(Error::DimensionMismatch { left: u.dim(), right: 1 << k });
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return invalid(format!("qubit {t} out of range for {n} qubits"));
        }
        if targets[..i].contains(&t) {
            return invalid(format!("qubit {t} repeated"));
        }
    }
    let dim = 1usize << n;
    let shift = |q: usize| n - 1 - q;
    let mask: usize = targets.iter().map(|&q| 1 << shift(q)).sum();
    let sub = |idx: usize| -> usize {
        targets.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> shift(q)) & 1))
    };
    let spread = |s: usize| -> usize {
        targets.iter().enumerate().fold(0, |acc, (i, &q)| acc | (((s >> (k - 1 - i)) & 1) << shift(q)))
    };
    let mut out = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let rest = col & !mask;
        let sc = sub(col);
        for sr in 0..(1 << k) {
            let z = u[(sr, sc)];
            if z != ZERO {
                out[(rest | spread(sr), col)] = z;
            }
        }
    }
    Ok(out)
}

/// Eq.-2 style XY evolution with `theta = 2Jt`: `cos theta` on the diagonal of
/// the `|01>,|10>` block, `i sin theta` off it.
pub fn xy_evolution(theta: f64) -> Result<ComplexMatrix> {
    if !theta.is_finite() {
        return invalid("xy_evolution: non-finite angle");
    }
    let (s, co) = theta.sin_cos();
    Ok(ComplexMatrix::from_rows(&[
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, c(co, 0.0), c(0.0, s), ZERO],
        [ZERO, c(0.0, s), c(co, 0.0), ZERO],
        [ZERO, ZERO, ZERO, ONE],
    ]))
}

/// `exp(i theta (XX + YY + ZZ))`: triplet picks up `e^{i theta}`, singlet `e^{-3 i theta}`.
pub fn heisenberg_evolution(theta: f64) -> Result<ComplexMatrix> {
    if !theta.is_finite() {
        return invalid("heisenberg_evolution: non-finite angle");
    }
    Ok(triplet_singlet(cis(theta), cis(-3.0 * theta)))
}

fn triplet_singlet(t: C64, s: C64) -> ComplexMatrix {
    let p = (t + s) * 0.5;
    let m = (t - s) * 0.5;
    ComplexMatrix::from_rows(&[[t, ZERO, ZERO, ZERO], [ZERO, p, m, ZERO], [ZERO, m, p, ZERO], [ZERO, ZERO, ZERO, t]])
}

pub fn iswap() -> ComplexMatrix {
    xy_evolution(FRAC_PI_2).expect("finite")
}

pub fn swap() -> ComplexMatrix {
    ComplexMatrix::permutation(&[0, 2, 1, 3])
}

/// Control on qubit 0 (`|1>`), target qubit 1.
pub fn cnot() -> ComplexMatrix {
    ComplexMatrix::permutation(&[0, 1, 3, 2])
}

pub fn cpf() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[ONE, ONE, ONE, -ONE])
}

/// Triplet eigenvalue 1, singlet `-i`; equals `e^{-i pi/8}` times the
/// Heisenberg evolution at `J_H t = pi/8`, and squares to SWAP.
pub fn sqrt_swap() -> ComplexMatrix {
    triplet_singlet(ONE, -I)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// Argument is `2Jt`.
    XYEvolve(f64),
    ISwap,
    Swap,
    Cnot,
    Cpf,
    SqrtSwap,
    /// Argument is `J_H t`.
    HeisenbergEvolve(f64),
    Rot { axis: Axis, angle: f64, qubit: usize },
    Hadamard { qubit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub arity: usize,
}

impl GateSpec {
    pub fn two(kind: GateKind) -> Self {
        GateSpec { kind, arity: 2 }
    }

    pub fn rot(axis: Axis, angle: f64, qubit: usize, arity: usize) -> Self {
        GateSpec { kind: GateKind::Rot { axis, angle, qubit }, arity }
    }
}

pub fn build_gate(spec: &GateSpec) -> Result<ComplexMatrix> {
    let n = spec.arity;
    if n == 0 {
        return invalid("arity must be positive");
    }
    let two = |u: ComplexMatrix| -> Result<ComplexMatrix> {
        if n < 2 {
            return invalid("two-qubit gate needs arity >= 2");
        }
        embed(&u, &[0, 1], n)
    };
    match spec.kind {
        GateKind::XYEvolve(theta) => two(xy_evolution(theta)?),
        GateKind::HeisenbergEvolve(theta) => two(heisenberg_evolution(theta)?),
        GateKind::ISwap => two(iswap()),
        GateKind::Swap => two(swap()),
        GateKind::Cnot => two(cnot()),
        GateKind::Cpf => two(cpf()),
        GateKind::SqrtSwap => two(sqrt_swap()),
        GateKind::Rot { axis, angle, qubit } => {
            if !angle.is_finite() {
                return invalid("rotation angle must be finite");
            }
            embed(&rot(axis, angle), &[qubit], n)
        }
        GateKind::Hadamard { qubit } => embed(&hadamard(), &[qubit], n),
    }
}

/// Product of `gates` in written order: the last element acts first.
pub fn compose(gates: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = gates.first().ok_or_else(|| Error::InvalidArgument("compose: empty list".into()))?;
    let mut acc = first.clone();
    for g in &gates[1..] {
        acc = acc.checked_mul(g)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFit {
    pub equal: bool,
    /// Fitted `c` with `a ~ c b`; absent when the overlap vanishes.
    pub phase: Option<C64>,
    pub residual: f64,
}

pub fn equal_up_to_global_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<PhaseFit> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let overlap: C64 = b.entries().iter().zip(a.entries()).map(|(x, y)| x.conj() * y).sum();
    if overlap.norm() < 1e-300 {
        let residual = a.max_abs().max(b.max_abs());
        return Ok(PhaseFit { equal: residual < tol, phase: None, residual });
    }
    let phase = overlap / overlap.norm();
    let residual = a.max_diff(&b.scale(phase));
    Ok(PhaseFit { equal: residual < tol, phase: Some(phase), residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum Identity {
    CNOT_FROM_ISWAP,
    CPF_FROM_SQRTSWAP,
    ISWAP_SWAP_DIAG,
    CPF_FROM_ISWAP,
    SWAPCNOT_FROM_ISWAP,
    CNOT_REVERSED,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::CNOT_FROM_ISWAP,
        Identity::CPF_FROM_SQRTSWAP,
        Identity::ISWAP_SWAP_DIAG,
        Identity::CPF_FROM_ISWAP,
        Identity::SWAPCNOT_FROM_ISWAP,
        Identity::CNOT_REVERSED,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::CNOT_FROM_ISWAP => "CNOT_FROM_ISWAP",
            Identity::CPF_FROM_SQRTSWAP => "CPF_FROM_SQRTSWAP",
            Identity::ISWAP_SWAP_DIAG => "ISWAP_SWAP_DIAG",
            Identity::CPF_FROM_ISWAP => "CPF_FROM_ISWAP",
            Identity::SWAPCNOT_FROM_ISWAP => "SWAPCNOT_FROM_ISWAP",
            Identity::CNOT_REVERSED => "CNOT_REVERSED",
        }
    }

    /// `(lhs, rhs)` built from primitives.
    pub fn sides(self) -> (ComplexMatrix, ComplexMatrix) {
        let r1 = |axis, th| embed(&rot(axis, th), &[0], 2).expect("qubit 0");
        let r2 = |axis, th| embed(&rot(axis, th), &[1], 2).expect("qubit 1");
        let h1 = embed(&hadamard(), &[0], 2).expect("qubit 0");
        let h2 = embed(&hadamard(), &[1], 2).expect("qubit 1");
        let p1m = r1(Axis::Z, FRAC_PI_2);
        let p2m = r2(Axis::Z, FRAC_PI_2);
        let ok = |v: Result<ComplexMatrix>| v.expect("square 4x4 factors");
        match self {
            Identity::CNOT_FROM_ISWAP => (
                cnot(),
                ok(compose(&[
                    r1(Axis::Z, -FRAC_PI_2),
                    r2(Axis::X, FRAC_PI_2),
                    r2(Axis::Z, FRAC_PI_2),
                    iswap(),
                    r1(Axis::X, -FRAC_PI_2),
                    iswap(),
                    r2(Axis::Z, FRAC_PI_2),
                ])),
            ),
            Identity::CPF_FROM_SQRTSWAP => (
                cpf(),
                ok(compose(&[
                    r1(Axis::Z, FRAC_PI_2),
                    r2(Axis::Z, -FRAC_PI_2),
                    sqrt_swap(),
                    r1(Axis::Z, -PI),
                    sqrt_swap(),
                ]))
                .scale(cis(-FRAC_PI_2)),
            ),
            Identity::ISWAP_SWAP_DIAG => {
                (iswap(), ok(compose(&[swap(), ComplexMatrix::from_diag(&[ONE, I, I, ONE])])))
            }
            Identity::CPF_FROM_ISWAP => (cpf(), ok(compose(&[swap(), iswap(), p1m.clone(), p2m.clone()]))),
            Identity::SWAPCNOT_FROM_ISWAP => (
                ok(compose(&[swap(), cnot()])),
                ok(compose(&[h1, iswap(), p1m, p2m, h2])),
            ),
            Identity::CNOT_REVERSED => (cnot(), ok(compose(&[h2, p1m, p2m, iswap(), h1, swap()]))),
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown identity {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub holds: bool,
    pub residual: f64,
    pub phase: C64,
}

pub fn check_identity(id: Identity) -> IdentityCheck {
    check_identity_tol(id, TOL)
}

pub fn check_identity_tol(id: Identity, tol: f64) -> IdentityCheck {
    let (lhs, rhs) = id.sides();
    // phase reported as rhs = phase * lhs
    let fit = equal_up_to_global_phase(&rhs, &lhs, tol).expect("both 4x4");
    IdentityCheck { holds: fit.equal, residual: fit.residual, phase: fit.phase.unwrap_or(ZERO) }
}

/// `e^{i pi sigma / 4}` with the requested sign, i.e. a quarter turn.
pub fn quarter(axis: Axis, sign: f64) -> ComplexMatrix {
    rot(axis, sign * FRAC_PI_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn xy_at_zero_is_identity() {
        assert!(xy_evolution(0.0).unwrap().max_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn xy_at_half_pi_is_iswap() {
        let u = iswap();
        let v = u.apply(&[ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(close(v[2], I));
        let v = u.apply(&[ZERO, ZERO, ONE, ZERO]).unwrap();
        assert!(close(v[1], I));
        assert!(close(u[(0, 0)], ONE) && close(u[(3, 3)], ONE));
    }

    #[test]
    fn xy_at_pi_is_diag_sign_flip() {
        let want = ComplexMatrix::from_diag(&[ONE, -ONE, -ONE, ONE]);
        assert!(xy_evolution(PI).unwrap().max_diff(&want) < 1e-15);
    }

    #[test]
    fn xy_rejects_nan() {
        assert!(xy_evolution(f64::NAN).is_err());
    }

    #[test]
    fn rot_z_on_first_qubit_is_p1_minus() {
        let g = build_gate(&GateSpec::rot(Axis::Z, FRAC_PI_2, 0, 2)).unwrap();
        let want = ComplexMatrix::from_diag(&[cis(FRAC_PI_4), cis(FRAC_PI_4), cis(-FRAC_PI_4), cis(-FRAC_PI_4)]);
        assert!(g.max_diff(&want) < 1e-15);
    }

    #[test]
    fn rot_matches_matrix_exponential() {
        for axis in Axis::ALL {
            let want = pauli(axis).scale(c(0.0, 0.37)).expm();
            assert!(rot(axis, 0.74).max_diff(&want) < 1e-14);
        }
    }

    #[test]
    fn cpf_is_diag() {
        let g = build_gate(&GateSpec::two(GateKind::Cpf)).unwrap();
        assert_eq!(g, ComplexMatrix::from_diag(&[ONE, ONE, ONE, -ONE]));
    }

    #[test]
    fn sqrt_swap_squares_to_swap_exactly() {
        let s = sqrt_swap();
        assert!((&s * &s).max_diff(&swap()) < 1e-15);
    }

    #[test]
    fn sqrt_swap_is_heisenberg_eighth_turn() {
        let h = heisenberg_evolution(PI / 8.0).unwrap().scale(cis(-PI / 8.0));
        assert!(h.max_diff(&sqrt_swap()) < 1e-15);
    }

    #[test]
    fn heisenberg_matches_generator() {
        let xx = pauli(Axis::X).kron(&pauli(Axis::X));
        let yy = pauli(Axis::Y).kron(&pauli(Axis::Y));
        let zz = pauli(Axis::Z).kron(&pauli(Axis::Z));
        let gen = &(&xx + &yy) + &zz;
        let want = gen.scale(c(0.0, 0.3)).expm();
        assert!(heisenberg_evolution(0.3).unwrap().max_diff(&want) < 1e-13);
    }

    #[test]
    fn bad_qubit_index_rejected() {
        assert!(build_gate(&GateSpec::rot(Axis::X, 1.0, 2, 2)).is_err());
        assert!(build_gate(&GateSpec { kind: GateKind::Cnot, arity: 1 }).is_err());
    }

    #[test]
    fn embed_on_reversed_targets_gives_reversed_cnot() {
        let rev = embed(&cnot(), &[1, 0], 2).unwrap();
        let want = compose(&[swap(), cnot(), swap()]).unwrap();
        assert!(rev.max_diff(&want) < 1e-15);
    }

    #[test]
    fn compose_singleton_and_iswap_squared() {
        let a = cnot();
        assert_eq!(compose(&[a.clone()]).unwrap(), a);
        let sq = compose(&[iswap(), iswap()]).unwrap();
        let v = sq.apply(&[ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(close(v[1], -ONE));
    }

    #[test]
    fn compose_order_last_acts_first() {
        let x0 = embed(&pauli(Axis::X), &[0], 2).unwrap();
        let u = compose(&[cnot(), x0]).unwrap();
        // |00> -> X0 -> |10> -> CNOT -> |11>
        let v = u.apply(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        assert!(close(v[3], ONE));
    }

    #[test]
    fn compose_dim_mismatch() {
        assert!(compose(&[ComplexMatrix::identity(2), ComplexMatrix::identity(4)]).is_err());
    }

    #[test]
    fn phase_fit_recovers_phase() {
        let u = iswap();
        let fit = equal_up_to_global_phase(&u.scale(cis(PI / 3.0)), &u, 1e-12).unwrap();
        assert!(fit.equal);
        assert!(close(fit.phase.unwrap(), cis(PI / 3.0)));
        assert!(!equal_up_to_global_phase(&cnot(), &iswap(), 1e-12).unwrap().equal);
    }

    #[test]
    fn all_identities_hold() {
        for id in Identity::ALL {
            let r = check_identity(id);
            assert!(r.holds, "{id}: residual {}", r.residual);
        }
    }

    #[test]
    fn identity_phases() {
        let expect = [
            (Identity::CNOT_FROM_ISWAP, cis(FRAC_PI_4)),
            (Identity::CPF_FROM_SQRTSWAP, -ONE),
            (Identity::ISWAP_SWAP_DIAG, ONE),
            (Identity::CPF_FROM_ISWAP, I),
            (Identity::SWAPCNOT_FROM_ISWAP, I),
            (Identity::CNOT_REVERSED, I),
        ];
        for (id, ph) in expect {
            assert!(close(check_identity(id).phase, ph), "{id}: {}", check_identity(id).phase);
        }
    }

    #[test]
    fn standard_sqrt_swap_breaks_cpf_identity() {
        // singlet phase +i instead of -i
        let other = triplet_singlet(ONE, I);
        let r1 = |axis, th| embed(&rot(axis, th), &[0], 2).unwrap();
        let r2 = |axis, th| embed(&rot(axis, th), &[1], 2).unwrap();
        let rhs = compose(&[r1(Axis::Z, FRAC_PI_2), r2(Axis::Z, -FRAC_PI_2), other.clone(), r1(Axis::Z, -PI), other])
            .unwrap();
        assert!(!equal_up_to_global_phase(&cpf(), &rhs, 1e-6).unwrap().equal);
    }

    #[test]
    fn cnot_from_cpf_with_y_rotations() {
        let r2 = |th| embed(&rot(Axis::Y, th), &[1], 2).unwrap();
        let rhs = compose(&[r2(-FRAC_PI_2), cpf(), r2(FRAC_PI_2)]).unwrap();
        let fit = equal_up_to_global_phase(&cnot(), &rhs, 1e-12).unwrap();
        assert!(fit.equal && close(fit.phase.unwrap(), ONE));
    }

    #[test]
    fn identity_names_parse() {
        assert_eq!("cnot_reversed".parse::<Identity>().unwrap(), Identity::CNOT_REVERSED);
        assert!("NOPE".parse::<Identity>().is_err());
    }
}
