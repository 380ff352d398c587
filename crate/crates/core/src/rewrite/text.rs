//! Line-oriented circuit format.
//!
//! ```text
//! PAIRS 2
//! BY+ 1
//! BCNOT 0 1
//! PIX A0
//! GATE XY A0 A1 1.5707963267948966
//! MEASZ A1
//! FRAME 3 1 Y
//! RELABEL 1 0
//! ```
//!
//! Blank lines and `#` comments are ignored. Angles use the shortest
//! round-trip float form so text survives a parse/print cycle unchanged.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{Circuit, CircuitOp, FrameRecord, Wire};
use crate::bell::{BilateralKind, Sign};
use crate::error::{Error, Result};
use crate::gates::{Axis, GateKind};

fn upper(axis: Axis) -> char {
    axis.letter().to_ascii_uppercase()
}

fn gate_name(kind: &GateKind) -> (String, Option<f64>) {
    match *kind {
        GateKind::XYEvolve(t) => ("XY".into(), Some(t)),
        GateKind::HeisenbergEvolve(t) => ("HEIS".into(), Some(t)),
        GateKind::ISwap => ("ISWAP".into(), None),
        GateKind::Swap => ("SWAP".into(), None),
        GateKind::Cnot => ("CNOT".into(), None),
        GateKind::Cpf => ("CPF".into(), None),
        GateKind::SqrtSwap => ("SQRTSWAP".into(), None),
        GateKind::Rot { axis, angle, .. } => (format!("R{}", upper(axis)), Some(angle)),
        GateKind::Hadamard { .. } => ("H".into(), None),
    }
}

fn parse_gate(name: &str, param: Option<f64>) -> std::result::Result<GateKind, String> {
    let need = |p: Option<f64>| p.ok_or_else(|| format!("{name} needs an angle"));
    let kind = match name {
        "XY" => GateKind::XYEvolve(need(param)?),
        "HEIS" => GateKind::HeisenbergEvolve(need(param)?),
        "ISWAP" => GateKind::ISwap,
        "SWAP" => GateKind::Swap,
        "CNOT" => GateKind::Cnot,
        "CPF" => GateKind::Cpf,
        "SQRTSWAP" => GateKind::SqrtSwap,
        "H" => GateKind::Hadamard { qubit: 0 },
        _ => {
            let axis = name
                .strip_prefix('R')
                .and_then(|a| a.chars().next().filter(|_| a.len() == 1))
                .and_then(Axis::from_letter)
                .ok_or_else(|| format!("unknown gate {name}"))?;
            GateKind::Rot { axis, angle: need(param)?, qubit: 0 }
        }
    };
    let takes_param = matches!(kind, GateKind::XYEvolve(_) | GateKind::HeisenbergEvolve(_) | GateKind::Rot { .. });
    if param.is_some() && !takes_param {
        return Err(format!("{name} takes no angle"));
    }
    Ok(kind)
}

fn two_pair_name(kind: BilateralKind) -> Option<&'static str> {
    Some(match kind {
        BilateralKind::BCnot => "BCNOT",
        BilateralKind::BSwap => "BSWAP",
        BilateralKind::BiSwap => "BISWAP",
        BilateralKind::BCpf => "BCPF",
        _ => return None,
    })
}

fn write_op(out: &mut String, op: &CircuitOp) -> fmt::Result {
    match op {
        CircuitOp::Measure(w) => writeln!(out, "MEASZ {w}"),
        CircuitOp::Bilateral { kind: BilateralKind::Rot { axis, sign }, pairs } => {
            writeln!(out, "B{}{} {}", upper(*axis), sign.symbol(), pairs[0])
        }
        CircuitOp::Bilateral { kind: BilateralKind::UnilateralPi { axis, party }, pairs } => {
            writeln!(out, "PI{} {}{}", upper(*axis), party.letter(), pairs[0])
        }
        CircuitOp::Bilateral { kind, pairs } => {
            writeln!(out, "{} {} {}", two_pair_name(*kind).expect("two-pair kind"), pairs[0], pairs[1])
        }
        CircuitOp::Gate { kind, wires } => {
            let (name, param) = gate_name(kind);
            write!(out, "GATE {name}")?;
            for w in wires {
                write!(out, " {w}")?;
            }
            if let Some(p) = param {
                write!(out, " {p:?}")?;
            }
            writeln!(out)
        }
    }
}

impl Circuit {
    pub fn to_text(&self) -> String {
        let mut out = format!("PAIRS {}\n", self.n_pairs);
        for op in &self.ops {
            write_op(&mut out, op).expect("write to String");
        }
        for f in &self.frames {
            out.push_str(&format!("FRAME {} {} {}\n", f.position, f.pair, upper(f.axis)));
        }
        if self.relabel.iter().enumerate().any(|(i, &p)| i != p) {
            let perm: Vec<String> = self.relabel.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("RELABEL {}\n", perm.join(" ")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        let mut frames = Vec::new();
        let mut relabel = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |t: &str| t.parse::<usize>().map_err(|_| err(format!("bad integer {t:?}")));
            let wire = |t: &str| t.parse::<Wire>().map_err(|e| err(e.to_string()));
            let head = toks[0];
            if head == "PAIRS" {
                if circuit.is_some() || toks.len() != 2 {
                    return Err(err("PAIRS must appear once, first, with one count".into()));
                }
                circuit = Some(Circuit::new(num(toks[1])?).map_err(|e| err(e.to_string()))?);
                continue;
            }
            let c = circuit.as_mut().ok_or_else(|| err("missing PAIRS header".into()))?;
            let args = &toks[1..];
            let arity = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("{head} takes {n} argument(s)")))
                }
            };
            let op = match head {
                "FRAME" => {
                    arity(3)?;
                    let axis = single_axis(args[2]).ok_or_else(|| err(format!("bad axis {:?}", args[2])))?;
                    frames.push(FrameRecord { position: num(args[0])?, pair: num(args[1])?, axis });
                    continue;
                }
                "RELABEL" => {
                    relabel = Some(args.iter().map(|t| num(t)).collect::<Result<Vec<_>>>()?);
                    continue;
                }
                "MEASZ" => {
                    arity(1)?;
                    CircuitOp::Measure(wire(args[0])?)
                }
                "GATE" => {
                    let name = args.first().ok_or_else(|| err("GATE needs a name".into()))?;
                    let mut wires = Vec::new();
                    let mut param = None;
                    for (i, t) in args[1..].iter().enumerate() {
                        if t.starts_with(['A', 'B']) {
                            wires.push(wire(t)?);
                        } else if i == args.len() - 2 {
                            param = Some(t.parse::<f64>().map_err(|_| err(format!("bad angle {t:?}")))?);
                        } else {
                            return Err(err(format!("unexpected token {t:?}")));
                        }
                    }
                    CircuitOp::Gate { kind: parse_gate(name, param).map_err(err)?, wires }
                }
                _ => {
                    if let Some(kind) = parse_two_pair(head) {
                        arity(2)?;
                        CircuitOp::Bilateral { kind, pairs: vec![num(args[0])?, num(args[1])?] }
                    } else if let Some(kind) = parse_rotation(head) {
                        arity(1)?;
                        CircuitOp::Bilateral { kind, pairs: vec![num(args[0])?] }
                    } else if let Some(axis) = head.strip_prefix("PI").and_then(single_axis) {
                        arity(1)?;
                        let w = wire(args[0])?;
                        CircuitOp::Bilateral { kind: BilateralKind::UnilateralPi { axis, party: w.party }, pairs: vec![w.pair] }
                    } else {
                        return Err(err(format!("unknown op {head:?}")));
                    }
                }
            };
            c.push(op).map_err(|e| err(e.to_string()))?;
        }
        let mut c = circuit.ok_or(Error::Parse { line: 0, msg: "empty circuit file".into() })?;
        for f in frames {
            c.push_frame(f)?;
        }
        if let Some(r) = relabel {
            c.set_relabel(r)?;
        }
        Ok(c)
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Circuit::from_text(s)
    }
}

fn single_axis(s: &str) -> Option<Axis> {
    let mut ch = s.chars();
    let a = ch.next()?;
    if ch.next().is_some() {
        return None;
    }
    Axis::from_letter(a)
}

fn parse_two_pair(s: &str) -> Option<BilateralKind> {
    Some(match s {
        "BCNOT" => BilateralKind::BCnot,
        "BSWAP" => BilateralKind::BSwap,
        "BISWAP" => BilateralKind::BiSwap,
        "BCPF" => BilateralKind::BCpf,
        _ => return None,
    })
}

fn parse_rotation(s: &str) -> Option<BilateralKind> {
    let rest = s.strip_prefix('B')?;
    let mut ch = rest.chars();
    let axis = Axis::from_letter(ch.next()?)?;
    let sign = match (ch.next()?, ch.next()) {
        ('+', None) => Sign::Plus,
        ('-', None) => Sign::Minus,
        _ => return None,
    };
    Some(BilateralKind::Rot { axis, sign })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "PAIRS 3
BY+ 1
BX- 0
BCNOT 0 1
BSWAP 0 1
BISWAP 1 2
BCPF 2 0
PIX A0
PIZ B2
GATE XY A0 A1 1.5707963267948966
GATE RZ B1 -0.1
GATE H A2
GATE ISWAP B0 B1
MEASZ A1
MEASZ B1
FRAME 2 1 Y
RELABEL 1 2 0
";

    #[test]
    fn round_trip_is_exact() {
        let c = Circuit::from_text(SAMPLE).unwrap();
        assert_eq!(c.to_text(), SAMPLE);
        assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn odd_angles_survive() {
        for angle in [0.1 + 0.2, 1e-300, -std::f64::consts::PI, 12345.678901234567] {
            let text = format!("PAIRS 1\nGATE RX A0 {angle:?}\n");
            let c = Circuit::from_text(&text).unwrap();
            assert_eq!(c.to_text(), text);
            match &c.ops()[0] {
                CircuitOp::Gate { kind: GateKind::Rot { angle: a, .. }, .. } => assert_eq!(a.to_bits(), angle.to_bits()),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn comments_and_errors() {
        let c = Circuit::from_text("# hashing\nPAIRS 2\n\nBCNOT 0 1 # chain\n").unwrap();
        assert_eq!(c.ops().len(), 1);
        for bad in ["BCNOT 0 1\n", "PAIRS 2\nBCNOT 0\n", "PAIRS 2\nFOO 1\n", "PAIRS 2\nGATE RX A0\n", "PAIRS 2\nRELABEL 0 0\n"] {
            assert!(Circuit::from_text(bad).is_err(), "{bad:?}");
        }
        match Circuit::from_text("PAIRS 2\nBCNOT 0 1\nBQ+ 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
