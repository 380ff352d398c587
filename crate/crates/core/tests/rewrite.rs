use iswap_purify::bell::{BellLabel, BilateralKind, Sign};
use iswap_purify::gates::Axis;
use iswap_purify::rewrite::{
    breeding_template, check_rewrite_equivalence, contract_rotations, hashing_template, insert_swaps,
    measured_parity, replace_bcnot, rewrite, Circuit, CircuitOp, Direction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let n = rng.gen_range(2..=3);
    let mut c = Circuit::new(n).unwrap();
    for _ in 0..rng.gen_range(1..=6) {
        if rng.gen_bool(0.6) {
            let s = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            c.push(CircuitOp::bilateral(BilateralKind::BCnot, &[s, t])).unwrap();
        } else {
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
            let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
            let p = rng.gen_range(0..n);
            c.push(CircuitOp::bilateral(BilateralKind::Rot { axis, sign }, &[p])).unwrap();
        }
    }
    c
}

#[test]
fn random_bcnot_circuits_stay_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x15a9);
    for k in 0..50 {
        let c = random_circuit(&mut rng);
        for dir in [Direction::Forward, Direction::Reversed] {
            let r = rewrite(&c, dir).unwrap();
            let eq = check_rewrite_equivalence(&c, &r).unwrap();
            assert!(eq.equivalent, "case {k} {dir:?} residual {}\n{}", eq.residual, c.to_text());
            assert_eq!(r.gate_counts().cnot_class, 0);
            assert_eq!(r.gate_counts().biswap, c.gate_counts().bcnot);
            let back = Circuit::from_text(&r.to_text()).unwrap();
            assert_eq!(back, r);
        }
    }
}

#[test]
fn each_step_preserves_the_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let c = random_circuit(&mut rng);
        let a = insert_swaps(&c).unwrap();
        let b = replace_bcnot(&a, Direction::Forward).unwrap();
        let d = contract_rotations(&b).unwrap();
        for stage in [&a, &b, &d] {
            assert!(check_rewrite_equivalence(&c, stage).unwrap().equivalent, "{}", stage.to_text());
        }
    }
}

#[test]
fn replace_without_trailing_swap_is_rejected() {
    let c = Circuit::new(2).unwrap().with(CircuitOp::bilateral(BilateralKind::BCnot, &[0, 1])).unwrap();
    assert!(replace_bcnot(&c, Direction::Forward).is_err());
}

#[test]
fn single_bcnot_becomes_one_biswap() {
    let c = Circuit::from_text("PAIRS 2\nBCNOT 0 1\n").unwrap();
    let r = rewrite(&c, Direction::Forward).unwrap();
    let g = r.gate_counts();
    assert_eq!((g.biswap, g.bcnot, g.cnot_class), (1, 0, 0));
}

#[test]
fn all_hashing_subsets_and_breeding() {
    for s in 0..16u8 {
        let bits: Vec<u8> = (0..4).map(|i| (s >> (3 - i)) & 1).collect();
        let c = hashing_template(2, &bits).unwrap();
        let r = rewrite(&c, Direction::Forward).unwrap();
        assert!(check_rewrite_equivalence(&c, &r).unwrap().equivalent, "s={bits:?}");
    }
    let b = breeding_template(2).unwrap();
    let r = rewrite(&b, Direction::Forward).unwrap();
    assert!(check_rewrite_equivalence(&b, &r).unwrap().equivalent);
    assert_eq!(r.gate_counts().biswap, 3);
    assert_eq!(b.gate_counts().bcnot, 3);
}

#[test]
fn larger_breeding_parity_without_unitary() {
    // four pairs is past the dense-unitary limit but the statevector still runs
    let c = breeding_template(3).unwrap();
    let r = rewrite(&c, Direction::Forward).unwrap();
    assert!(check_rewrite_equivalence(&c, &r).is_err());
    use BellLabel::*;
    for input in [[PhiPlus, PsiPlus, PhiMinus], [PsiMinus, PsiPlus, PhiPlus], [PsiPlus, PhiPlus, PhiPlus]] {
        let want = input.iter().fold(0, |acc, l| acc ^ l.bits().0);
        for circ in [&c, &r] {
            let got = measured_parity(circ, &[input[0], input[1], input[2], PhiPlus]).unwrap();
            assert_eq!(got, vec![(3, want)]);
        }
    }
}
