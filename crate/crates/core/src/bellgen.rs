//! Bell pairs from a product state with a single two-qubit interaction.
//!
//! Qubit 0 is the first (most significant) qubit. Rotations are
//! `e^{i angle sigma / 2}`, so `e^{i pi sigma / 4}` is an angle of `pi / 2`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::bell::{bell_vector, BellLabel};
use crate::error::{invalid, Result};
use crate::gates::{self, inner, kron_vec, rot, Axis, ComplexMatrix, GateKind, C64};
use crate::rewrite::{Circuit, CircuitOp, Wire};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entangler {
    ISwap,
    SqrtSwap,
}

impl Entangler {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Entangler::ISwap => gates::iswap(),
            Entangler::SqrtSwap => gates::sqrt_swap(),
        }
    }

    fn gate_kind(self) -> GateKind {
        match self {
            Entangler::ISwap => GateKind::ISwap,
            Entangler::SqrtSwap => GateKind::SqrtSwap,
        }
    }
}

/// Single-qubit input states; `PlusY` is `(|0> + i|1>)/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputState {
    Zero,
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl InputState {
    /// Rotation taking `|0>` to this state, if one is needed.
    pub fn preparation(self) -> Option<(Axis, f64)> {
        match self {
            InputState::Zero => None,
            InputState::PlusX => Some((Axis::Y, -FRAC_PI_2)),
            InputState::MinusX => Some((Axis::Y, FRAC_PI_2)),
            InputState::PlusY => Some((Axis::X, FRAC_PI_2)),
            InputState::MinusY => Some((Axis::X, -FRAC_PI_2)),
        }
    }

    pub fn vector(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (re, im) = (C64::new(h, 0.0), C64::new(0.0, h));
        match self {
            InputState::Zero => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            InputState::PlusX => [re, re],
            InputState::MinusX => [re, -re],
            InputState::PlusY => [re, im],
            InputState::MinusY => [re, -im],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub axis: Axis,
    pub angle: f64,
    pub qubit: usize,
}

impl Rotation {
    pub fn new(axis: Axis, angle: f64, qubit: usize) -> Self {
        Rotation { axis, angle, qubit }
    }

    fn matrix(&self) -> Result<ComplexMatrix> {
        gates::embed(&rot(self.axis, self.angle), &[self.qubit], 2)
    }
}

/// Rotations are listed in time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellRecipe {
    pub target: BellLabel,
    pub input: [InputState; 2],
    pub pre: Vec<Rotation>,
    pub entangler: Entangler,
    pub post: Vec<Rotation>,
}

pub fn recipe_for(target: BellLabel, entangler: Entangler) -> BellRecipe {
    use BellLabel::*;
    use InputState::*;
    let q = FRAC_PI_2;
    let (input, post) = match entangler {
        Entangler::ISwap => {
            let (first, sign) = match target {
                PsiMinus => (PlusY, 1.0),
                PhiPlus => (PlusY, -1.0),
                PsiPlus => (MinusY, -1.0),
                PhiMinus => (MinusY, 1.0),
            };
            ([first, MinusY], vec![Rotation::new(Axis::Y, sign * q, 1)])
        }
        Entangler::SqrtSwap => {
            let z = if matches!(target, PsiPlus | PhiPlus) { q } else { -q };
            let x = if target.is_psi() { q } else { -q };
            (
                [PlusX, MinusX],
                vec![Rotation::new(Axis::Z, z, 0), Rotation::new(Axis::Y, q, 1), Rotation::new(Axis::X, x, 1)],
            )
        }
    };
    BellRecipe { target, input, pre: Vec::new(), entangler, post }
}

pub fn all_recipes() -> Vec<BellRecipe> {
    [Entangler::ISwap, Entangler::SqrtSwap]
        .iter()
        .flat_map(|&e| BellLabel::ALL.iter().map(move |&t| recipe_for(t, e)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub state: [C64; 4],
    pub fidelity_to_target: f64,
}

impl BellRecipe {
    pub fn validate(&self) -> Result<()> {
        for r in self.pre.iter().chain(&self.post) {
            if r.qubit > 1 || !r.angle.is_finite() {
                return invalid(format!("bad rotation {r:?}"));
            }
        }
        Ok(())
    }

    /// Rotations needed to reach the input product state from `|00>`.
    pub fn preparation_rotations(&self) -> Vec<Rotation> {
        self.input
            .iter()
            .enumerate()
            .filter_map(|(q, s)| s.preparation().map(|(axis, angle)| Rotation::new(axis, angle, q)))
            .collect()
    }

    /// Time slots of single-qubit rotations starting from `|00>`: rotations
    /// on different qubits run in parallel.
    pub fn rotation_slots(&self) -> usize {
        let depth = |rs: &[Rotation]| (0..2).map(|q| rs.iter().filter(|r| r.qubit == q).count()).max().unwrap_or(0);
        let prep = self.preparation_rotations();
        let mut first = prep.clone();
        first.extend(self.pre.iter().copied());
        depth(&first) + depth(&self.post)
    }

    pub fn two_qubit_gates(&self) -> usize {
        1
    }

    pub fn execute(&self) -> Result<Execution> {
        self.validate()?;
        let [a, b] = self.input;
        let mut psi = kron_vec(&a.vector(), &b.vector());
        for r in &self.pre {
            psi = r.matrix()?.apply(&psi)?;
        }
        psi = self.entangler.matrix().apply(&psi)?;
        for r in &self.post {
            psi = r.matrix()?.apply(&psi)?;
        }
        let fidelity = inner(&bell_vector(self.target), &psi).norm_sqr();
        let mut state = [C64::new(0.0, 0.0); 4];
        state.copy_from_slice(&psi);
        Ok(Execution { state, fidelity_to_target: fidelity })
    }

    /// The full sequence from `|00>` as a one-pair circuit: qubit 0 is `A0`,
    /// qubit 1 is `B0`.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let wire = |q: usize| if q == 0 { Wire::alice(0) } else { Wire::bob(0) };
        let rot_op = |r: &Rotation| CircuitOp::Gate {
            kind: GateKind::Rot { axis: r.axis, angle: r.angle, qubit: 0 },
            wires: vec![wire(r.qubit)],
        };
        let mut c = Circuit::new(1)?;
        for r in self.preparation_rotations().iter().chain(&self.pre) {
            c.push(rot_op(r))?;
        }
        c.push(CircuitOp::Gate { kind: self.entangler.gate_kind(), wires: vec![wire(0), wire(1)] })?;
        for r in &self.post {
            c.push(rot_op(r))?;
        }
        Ok(c)
    }
}

pub fn execute_recipe(r: &BellRecipe) -> Result<Execution> {
    r.execute()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::classify_bell;
    use crate::rewrite::simulate;

    #[test]
    fn all_eight_reach_their_targets() {
        for r in all_recipes() {
            let e = r.execute().unwrap();
            assert!((e.fidelity_to_target - 1.0).abs() < 1e-12, "{:?} {:?}: {}", r.target, r.entangler, e.fidelity_to_target);
            let norm: f64 = e.state.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_budgets() {
        for r in all_recipes() {
            let want = match r.entangler {
                Entangler::ISwap => 2,
                Entangler::SqrtSwap => 3,
            };
            assert_eq!(r.rotation_slots(), want, "{:?} {:?}", r.target, r.entangler);
            assert_eq!(r.two_qubit_gates(), 1);
        }
    }

    #[test]
    fn wrong_sign_gives_another_bell_state() {
        let mut r = recipe_for(BellLabel::PsiMinus, Entangler::ISwap);
        r.post[0].angle = -r.post[0].angle;
        let e = r.execute().unwrap();
        assert!(e.fidelity_to_target < 1e-12);
        assert_eq!(classify_bell(&e.state, 1e-9).unwrap().label, BellLabel::PhiPlus);
    }

    #[test]
    fn circuit_export_runs_from_ground_state() {
        for r in all_recipes() {
            let c = r.to_circuit().unwrap();
            let text = c.to_text();
            let back = Circuit::from_text(&text).unwrap();
            assert_eq!(back, c);
            let mut zero = vec![C64::new(0.0, 0.0); 4];
            zero[0] = C64::new(1.0, 0.0);
            let psi = simulate(&back, &zero).unwrap();
            let f = inner(&bell_vector(r.target), &psi).norm_sqr();
            assert!((f - 1.0).abs() < 1e-12, "{text}");
        }
    }

    #[test]
    fn preparation_matches_input_vectors() {
        for s in [InputState::PlusX, InputState::MinusX, InputState::PlusY, InputState::MinusY] {
            let (axis, angle) = s.preparation().unwrap();
            let v = rot(axis, angle).apply(&InputState::Zero.vector()).unwrap();
            let want = s.vector();
            assert!((inner(&want, &v).norm() - 1.0).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn bad_rotation_rejected() {
        let mut r = recipe_for(BellLabel::PhiPlus, Entangler::ISwap);
        r.post.push(Rotation::new(Axis::X, 0.1, 2));
        assert!(r.execute().is_err());
    }
}
