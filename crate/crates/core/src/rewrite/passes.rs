//! The three rewrite steps: insert swaps, replace BCNOT+BSWAP, contract.

use serde::{Deserialize, Serialize};

use super::{Circuit, CircuitOp, FrameRecord};
use crate::bell::{BilateralKind, Sign};
use crate::error::{Error, Result};
use crate::gates::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reversed,
}

/// Ops interleaved with frame markers, so passes can move both together.
#[derive(Debug, Clone)]
enum Item {
    Op(CircuitOp),
    Frame { pair: usize, axis: Axis },
}

impl Item {
    fn touches_pair(&self, p: usize) -> bool {
        match self {
            Item::Op(op) => op.touches_pair(p),
            Item::Frame { pair, .. } => *pair == p,
        }
    }
}

fn to_items(c: &Circuit) -> Vec<Item> {
    let mut items = Vec::new();
    for (i, op) in c.ops.iter().enumerate() {
        items.extend(c.frames.iter().filter(|f| f.position == i).map(|f| Item::Frame { pair: f.pair, axis: f.axis }));
        items.push(Item::Op(op.clone()));
    }
    let n = c.ops.len();
    items.extend(c.frames.iter().filter(|f| f.position == n).map(|f| Item::Frame { pair: f.pair, axis: f.axis }));
    items
}

fn from_items(n_pairs: usize, items: Vec<Item>, relabel: Vec<usize>) -> Result<Circuit> {
    let mut c = Circuit::new(n_pairs)?;
    let mut frames = Vec::new();
    for item in items {
        match item {
            Item::Op(op) => c.push(op)?,
            Item::Frame { pair, axis } => frames.push(FrameRecord { position: c.ops.len(), pair, axis }),
        }
    }
    for f in frames {
        c.push_frame(f)?;
    }
    c.set_relabel(relabel)?;
    Ok(c)
}

/// Step (i): a BSWAP after every BCNOT. Downstream pair indices are swapped so
/// the circuit still does the same thing up to the recorded relabeling.
pub fn insert_swaps(c: &Circuit) -> Result<Circuit> {
    // phys[i] is where logical pair i currently lives
    let mut phys: Vec<usize> = (0..c.n_pairs).collect();
    let mut items = Vec::new();
    for item in to_items(c) {
        match item {
            Item::Op(op) => {
                let mapped = op.map_pairs(|p| phys[p]);
                let bcnot = match &mapped {
                    CircuitOp::Bilateral { kind: BilateralKind::BCnot, pairs } => Some((pairs[0], pairs[1])),
                    _ => None,
                };
                items.push(Item::Op(mapped));
                if let Some((s, t)) = bcnot {
                    items.push(Item::Op(CircuitOp::bilateral(BilateralKind::BSwap, &[s, t])));
                    for p in phys.iter_mut() {
                        if *p == s {
                            *p = t;
                        } else if *p == t {
                            *p = s;
                        }
                    }
                }
            }
            Item::Frame { pair, axis } => items.push(Item::Frame { pair: phys[pair], axis }),
        }
    }
    // compose with any relabeling the input already carried
    let relabel = c.relabel.iter().map(|&r| phys[r]).collect();
    from_items(c.n_pairs, items, relabel)
}

fn rot(axis: Axis, sign: Sign, pair: usize) -> Item {
    Item::Op(CircuitOp::bilateral(BilateralKind::Rot { axis, sign }, &[pair]))
}

/// BCNOT(s,t) then BSWAP(s,t), written with one BiSWAP and bilateral rotations.
fn replacement(s: usize, t: usize, dir: Direction) -> Vec<Item> {
    let biswap = Item::Op(CircuitOp::bilateral(BilateralKind::BiSwap, &[s, t]));
    match dir {
        Direction::Forward => vec![
            rot(Axis::Y, Sign::Plus, t),
            rot(Axis::Z, Sign::Plus, s),
            rot(Axis::Z, Sign::Plus, t),
            biswap,
            rot(Axis::Y, Sign::Minus, s),
        ],
        // conjugate form with the roles of the two pairs exchanged by the swap
        Direction::Reversed => vec![
            rot(Axis::Y, Sign::Plus, t),
            biswap,
            rot(Axis::Z, Sign::Plus, s),
            rot(Axis::Z, Sign::Plus, t),
            rot(Axis::Y, Sign::Minus, s),
        ],
    }
}

/// Step (ii). Every BCNOT must be immediately followed by a BSWAP on the same
/// pairs; the pair is replaced by the BiSWAP sequence.
pub fn replace_bcnot(c: &Circuit, dir: Direction) -> Result<Circuit> {
    let items = to_items(c);
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        if let Item::Op(CircuitOp::Bilateral { kind: BilateralKind::BCnot, pairs }) = &items[i] {
            let (s, t) = (pairs[0], pairs[1]);
            match items.get(i + 1) {
                Some(Item::Op(CircuitOp::Bilateral { kind: BilateralKind::BSwap, pairs: sw }))
                    if (sw[0] == s && sw[1] == t) || (sw[0] == t && sw[1] == s) =>
                {
                    out.extend(replacement(s, t, dir));
                    i += 2;
                    continue;
                }
                _ => {
                    return Err(Error::Precondition(format!(
                        "BCNOT {s} {t} at op {} is not followed by a BSWAP on the same pairs",
                        op_index(&items, i)
                    )))
                }
            }
        }
        out.push(items[i].clone());
        i += 1;
    }
    from_items(c.n_pairs, out, c.relabel.clone())
}

fn op_index(items: &[Item], i: usize) -> usize {
    items[..i].iter().filter(|it| matches!(it, Item::Op(_))).count()
}

fn as_rotation(item: &Item) -> Option<(Axis, Sign, usize)> {
    match item {
        Item::Op(CircuitOp::Bilateral { kind: BilateralKind::Rot { axis, sign }, pairs }) => Some((*axis, *sign, pairs[0])),
        _ => None,
    }
}

/// Step (iii). Adjacent bilateral rotations about the same axis on the same
/// pair are removed: opposite signs cancel exactly, equal signs square to a
/// bilateral Pauli that is kept only as a frame record.
pub fn contract_rotations(c: &Circuit) -> Result<Circuit> {
    let mut items = to_items(c);
    'scan: loop {
        for i in 0..items.len() {
            let Some((axis, sign, pair)) = as_rotation(&items[i]) else { continue };
            let Some(j) = (i + 1..items.len()).find(|&j| items[j].touches_pair(pair)) else { continue };
            match as_rotation(&items[j]) {
                Some((a2, s2, _)) if a2 == axis => {
                    items.remove(j);
                    if s2 == sign {
                        items[i] = Item::Frame { pair, axis };
                    } else {
                        items.remove(i);
                    }
                    continue 'scan;
                }
                _ => {}
            }
        }
        break;
    }
    from_items(c.n_pairs, items, c.relabel.clone())
}

/// Steps (i) to (iii) in order.
pub fn rewrite(c: &Circuit, dir: Direction) -> Result<Circuit> {
    contract_rotations(&replace_bcnot(&insert_swaps(c)?, dir)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{check_rewrite_equivalence, Wire};

    fn bcnot(s: usize, t: usize) -> CircuitOp {
        CircuitOp::bilateral(BilateralKind::BCnot, &[s, t])
    }

    fn brot(axis: Axis, sign: Sign, p: usize) -> CircuitOp {
        CircuitOp::bilateral(BilateralKind::Rot { axis, sign }, &[p])
    }

    #[test]
    fn insert_swaps_examples() {
        let c = Circuit::new(2).unwrap().with(bcnot(0, 1)).unwrap();
        let r = insert_swaps(&c).unwrap();
        assert_eq!(r.to_text(), "PAIRS 2\nBCNOT 0 1\nBSWAP 0 1\nRELABEL 1 0\n");

        let empty = Circuit::new(2).unwrap().with(brot(Axis::X, Sign::Plus, 0)).unwrap();
        assert_eq!(insert_swaps(&empty).unwrap(), empty);
    }

    #[test]
    fn downstream_ops_follow_the_swap() {
        let c = Circuit::new(2)
            .unwrap()
            .with(bcnot(0, 1))
            .unwrap()
            .with(brot(Axis::X, Sign::Plus, 0))
            .unwrap()
            .with(CircuitOp::Measure(Wire::alice(1)))
            .unwrap();
        let r = insert_swaps(&c).unwrap();
        assert_eq!(r.to_text(), "PAIRS 2\nBCNOT 0 1\nBSWAP 0 1\nBX+ 1\nMEASZ A0\nRELABEL 1 0\n");
    }

    #[test]
    fn single_bcnot_replacement() {
        let c = Circuit::new(2).unwrap().with(bcnot(0, 1)).unwrap();
        let r = replace_bcnot(&insert_swaps(&c).unwrap(), Direction::Forward).unwrap();
        assert_eq!(r.to_text(), "PAIRS 2\nBY+ 1\nBZ+ 0\nBZ+ 1\nBISWAP 0 1\nBY- 0\nRELABEL 1 0\n");
        for dir in [Direction::Forward, Direction::Reversed] {
            let r = replace_bcnot(&insert_swaps(&c).unwrap(), dir).unwrap();
            let eq = check_rewrite_equivalence(&c, &r).unwrap();
            assert!(eq.equivalent, "{dir:?} residual {}", eq.residual);
        }
    }

    #[test]
    fn bare_bcnot_is_rejected() {
        let c = Circuit::new(2).unwrap().with(bcnot(0, 1)).unwrap();
        assert!(matches!(replace_bcnot(&c, Direction::Forward), Err(Error::Precondition(_))));
        let empty = Circuit::new(2).unwrap();
        assert_eq!(replace_bcnot(&empty, Direction::Forward).unwrap(), empty);
    }

    #[test]
    fn contraction_rules() {
        let c = Circuit::new(2)
            .unwrap()
            .with(brot(Axis::Z, Sign::Plus, 0))
            .unwrap()
            .with(brot(Axis::X, Sign::Plus, 1))
            .unwrap()
            .with(brot(Axis::Z, Sign::Minus, 0))
            .unwrap();
        let r = contract_rotations(&c).unwrap();
        assert_eq!(r.to_text(), "PAIRS 2\nBX+ 1\n");

        let c = Circuit::new(2)
            .unwrap()
            .with(brot(Axis::Y, Sign::Plus, 1))
            .unwrap()
            .with(brot(Axis::Y, Sign::Plus, 1))
            .unwrap()
            .with(bcnot(0, 1))
            .unwrap();
        let r = contract_rotations(&c).unwrap();
        assert_eq!(r.to_text(), "PAIRS 2\nBCNOT 0 1\nFRAME 0 1 Y\n");
        assert!(check_rewrite_equivalence(&c, &r).unwrap().equivalent);
    }

    #[test]
    fn contraction_blocked_by_intervening_op() {
        let c = Circuit::new(2)
            .unwrap()
            .with(brot(Axis::Y, Sign::Plus, 1))
            .unwrap()
            .with(bcnot(0, 1))
            .unwrap()
            .with(brot(Axis::Y, Sign::Minus, 1))
            .unwrap();
        assert_eq!(contract_rotations(&c).unwrap(), c);
    }
}
