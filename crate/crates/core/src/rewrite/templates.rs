//! Hashing and breeding circuits and the bit-level parity oracle.
//!
//! Bell strings use two bits per pair, amplitude bit first:
//! Phi+ = 00, Phi- = 01, Psi+ = 10, Psi- = 11.

use super::{Circuit, CircuitOp, Wire};
use crate::bell::{BellLabel, BilateralKind, Party, Sign};
use crate::error::{invalid, Result};
use crate::gates::Axis;

pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => invalid(format!("bit string {s:?} has a non-binary character")),
        })
        .collect()
}

fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.iter().any(|&b| b > 1) {
        return invalid("bit string entries must be 0 or 1");
    }
    if bits.len() % 2 != 0 {
        return invalid(format!("bit string length {} is odd", bits.len()));
    }
    Ok(())
}

/// Parity of `x AND s`: what the hashing measurement reveals.
pub fn hashing_parity(x: &[u8], s: &[u8]) -> Result<u8> {
    check_bits(x)?;
    check_bits(s)?;
    if x.len() != s.len() {
        return invalid(format!("x has {} bits but s has {}", x.len(), s.len()));
    }
    Ok(x.iter().zip(s).map(|(a, b)| a & b).fold(0, |acc, v| acc ^ v))
}

/// What a pair's 2-bit symbol selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    /// 00: pair stays out of the parity.
    Skip,
    /// 10: amplitude bit, no rotation.
    Amplitude,
    /// 01: phase bit, via `B^y_+`.
    Phase,
    /// 11: both bits, via `B^x_+` then a unilateral pi about x.
    Both,
}

impl Symbol {
    pub fn from_bits(a: u8, p: u8) -> Symbol {
        match (a, p) {
            (0, 0) => Symbol::Skip,
            (1, 0) => Symbol::Amplitude,
            (0, _) => Symbol::Phase,
            _ => Symbol::Both,
        }
    }
}

/// Rotations that move the selected bit combination into the amplitude bit.
pub fn symbol_action(sym: Symbol, pair: usize) -> Vec<CircuitOp> {
    let rot = |axis| CircuitOp::bilateral(BilateralKind::Rot { axis, sign: Sign::Plus }, &[pair]);
    match sym {
        Symbol::Skip | Symbol::Amplitude => Vec::new(),
        Symbol::Phase => vec![rot(Axis::Y)],
        Symbol::Both => vec![
            rot(Axis::X),
            CircuitOp::bilateral(BilateralKind::UnilateralPi { axis: Axis::X, party: Party::Alice }, &[pair]),
        ],
    }
}

/// One hashing step for subset string `s` (two bits per pair). The last
/// selected pair collects the parity through a BCNOT chain and is measured.
pub fn hashing_template(n: usize, s: &[u8]) -> Result<Circuit> {
    if n < 2 {
        return invalid("hashing needs at least two pairs");
    }
    check_bits(s)?;
    if s.len() != 2 * n {
        return invalid(format!("s has {} bits, expected {}", s.len(), 2 * n));
    }
    let mut c = Circuit::new(n)?;
    let selected: Vec<(usize, Symbol)> = (0..n)
        .map(|i| (i, Symbol::from_bits(s[2 * i], s[2 * i + 1])))
        .filter(|(_, sym)| *sym != Symbol::Skip)
        .collect();
    let Some(&(target, _)) = selected.last() else {
        return Ok(c);
    };
    for &(i, sym) in &selected {
        for op in symbol_action(sym, i) {
            c.push(op)?;
        }
    }
    for &(i, _) in &selected[..selected.len() - 1] {
        c.push(CircuitOp::bilateral(BilateralKind::BCnot, &[i, target]))?;
    }
    c.push(CircuitOp::Measure(Wire::alice(target)))?;
    c.push(CircuitOp::Measure(Wire::bob(target)))?;
    Ok(c)
}

/// Breeding with `n_impure` pairs plus one pure ancilla (the last pair). The
/// amplitude parity of the impure pairs is chained into the ancilla and the
/// chain is undone, so only the ancilla is measured.
pub fn breeding_template(n_impure: usize) -> Result<Circuit> {
    if n_impure < 2 {
        return invalid("breeding needs at least two impure pairs");
    }
    let anc = n_impure;
    let mut c = Circuit::new(n_impure + 1)?;
    let bcnot = |s, t| CircuitOp::bilateral(BilateralKind::BCnot, &[s, t]);
    for i in 0..n_impure - 1 {
        c.push(bcnot(i, i + 1))?;
    }
    c.push(bcnot(n_impure - 1, anc))?;
    for i in (0..n_impure - 1).rev() {
        c.push(bcnot(i, i + 1))?;
    }
    c.push(CircuitOp::Measure(Wire::alice(anc)))?;
    c.push(CircuitOp::Measure(Wire::bob(anc)))?;
    Ok(c)
}

/// Bell labels from a bit string, two bits per pair.
pub fn labels_from_bits(x: &[u8]) -> Result<Vec<BellLabel>> {
    check_bits(x)?;
    Ok(x.chunks(2).map(|b| BellLabel::from_bits(b[0], b[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{measured_parity, rewrite, Direction};

    #[test]
    fn parity_examples() {
        let zeros = [0u8; 4];
        for x in 0..16u8 {
            let xb: Vec<u8> = (0..4).map(|i| (x >> (3 - i)) & 1).collect();
            assert_eq!(hashing_parity(&xb, &zeros).unwrap(), 0);
        }
        assert_eq!(hashing_parity(&parse_bits("1100").unwrap(), &parse_bits("0100").unwrap()).unwrap(), 1);
        assert!(hashing_parity(&[1, 0], &[1, 0, 0, 0]).is_err());
        assert!(parse_bits("10a1").is_err());
    }

    #[test]
    fn template_shapes() {
        assert!(hashing_template(1, &[1, 0]).is_err());
        assert!(hashing_template(2, &[1, 0]).is_err());
        assert!(hashing_template(2, &[0, 0, 0, 0]).unwrap().is_empty());
        let c = hashing_template(2, &parse_bits("1100").unwrap()).unwrap();
        assert_eq!(c.to_text(), "PAIRS 2\nBX+ 0\nPIX A0\nMEASZ A0\nMEASZ B0\n");
        let c = hashing_template(2, &parse_bits("1001").unwrap()).unwrap();
        assert_eq!(c.to_text(), "PAIRS 2\nBY+ 1\nBCNOT 0 1\nMEASZ A1\nMEASZ B1\n");

        let b = breeding_template(2).unwrap();
        assert_eq!(b.to_text(), "PAIRS 3\nBCNOT 0 1\nBCNOT 1 2\nBCNOT 0 1\nMEASZ A2\nMEASZ B2\n");
        assert!(breeding_template(1).is_err());
    }

    #[test]
    fn exhaustive_hashing_parity() {
        for s in 0..16u8 {
            let sb: Vec<u8> = (0..4).map(|i| (s >> (3 - i)) & 1).collect();
            let c = hashing_template(2, &sb).unwrap();
            let r = rewrite(&c, Direction::Forward).unwrap();
            for x in 0..16u8 {
                let xb: Vec<u8> = (0..4).map(|i| (x >> (3 - i)) & 1).collect();
                let want = hashing_parity(&xb, &sb).unwrap();
                let labels = labels_from_bits(&xb).unwrap();
                for circ in [&c, &r] {
                    let got = measured_parity(circ, &labels).unwrap();
                    let got = got.first().map(|p| p.1).unwrap_or(0);
                    assert_eq!(got, want, "x={xb:?} s={sb:?}\n{}", circ.to_text());
                }
            }
        }
    }

    #[test]
    fn breeding_reveals_amplitude_parity() {
        let c = breeding_template(2).unwrap();
        let r = rewrite(&c, Direction::Forward).unwrap();
        for a in BellLabel::ALL {
            for b in BellLabel::ALL {
                let want = a.bits().0 ^ b.bits().0;
                for circ in [&c, &r] {
                    let got = measured_parity(circ, &[a, b, BellLabel::PhiPlus]).unwrap();
                    assert_eq!(got, vec![(2, want)]);
                }
            }
        }
    }
}
