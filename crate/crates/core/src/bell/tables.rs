//! Regenerating and checking the rotation, BCNOT-replacement and Bennett tables.
//!
//! Tables share one text format with the reference files under `data/`:
//! cells are `phase:S:T` (or `phase:L` for single pairs), rows start with the
//! initial labels followed by `|`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    apply_bilateral, bilateral_unitary, classify_bell_product, parse_phase, phase_str, BellLabel, BilateralKind, BilateralOp, PairSel,
    PhasedBell, Sign, TwoPairState, CLASSIFY_TOL,
};
use crate::error::{Error, Result};
use crate::gates::{equal_up_to_global_phase, Axis, ComplexMatrix, C64, ONE};

const TABLE1: &str = include_str!("../../data/table1.txt");
const TABLE2: &str = include_str!("../../data/table2.txt");
const TABLE3: &str = include_str!("../../data/table3.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    Rotations,
    DeutschReplacement,
    Bennett,
}

impl FromStr for TableKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ROTATIONS" | "I" | "1" => Ok(TableKind::Rotations),
            "DEUTSCH_REPLACEMENT" | "DEUTSCH" | "II" | "2" => Ok(TableKind::DeutschReplacement),
            "BENNETT" | "III" | "3" => Ok(TableKind::Bennett),
            _ => Err(Error::InvalidArgument(format!("unknown table {s:?}"))),
        }
    }
}

/// A Bell-pair product with the total phase carried on the S slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub phase: C64,
    pub s: BellLabel,
    pub t: BellLabel,
}

impl ProductEntry {
    pub fn same_labels(&self, other: &ProductEntry) -> bool {
        self.s == other.s && self.t == other.t
    }

    pub fn same(&self, other: &ProductEntry) -> bool {
        self.same_labels(other) && (self.phase - other.phase).norm() < 1e-9
    }

    fn cell(&self) -> String {
        format!("{}:{}:{}", phase_str(self.phase), self.s.ascii(), self.t.ascii())
    }

    fn labels_cell(&self) -> String {
        format!("{}:{}", self.s.ascii(), self.t.ascii())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationRow {
    pub axis: Axis,
    pub sign: Sign,
    /// Images of Phi+, Phi-, Psi+, Psi-.
    pub entries: [PhasedBell; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeutschRow {
    pub initial: (BellLabel, BellLabel),
    pub steps: [ProductEntry; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BennettRow {
    pub initial: (BellLabel, BellLabel),
    pub step_i: ProductEntry,
    /// `None` when the measured pair fails the test in both branches.
    pub branch_a: Option<ProductEntry>,
    pub branch_b: Option<ProductEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Table {
    Rotations(Vec<RotationRow>),
    Deutsch(Vec<DeutschRow>),
    Bennett(Vec<BennettRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub row: String,
    pub column: String,
    pub expected: String,
    pub got: String,
}

fn rot_name(axis: Axis, sign: Sign) -> String {
    format!("B{}{}", axis.letter(), sign.symbol())
}

fn pair_name(p: (BellLabel, BellLabel)) -> String {
    format!("{} {}", p.0.ascii(), p.1.ascii())
}

fn classify(st: &TwoPairState) -> ProductEntry {
    classify_bell_product(st, CLASSIFY_TOL).entry().expect("bilateral Clifford steps keep Bell products")
}

fn run(st: &TwoPairState, op: BilateralOp) -> TwoPairState {
    apply_bilateral(&op, st).expect("valid two-pair operation")
}

/// Measured (target) pair passes when Alice and Bob agree.
fn passes(e: &ProductEntry) -> bool {
    !e.t.is_psi()
}

fn generate_rotations() -> Vec<RotationRow> {
    let mut rows = Vec::new();
    for axis in Axis::ALL {
        for sign in [Sign::Plus, Sign::Minus] {
            let entries = BellLabel::ALL.map(|l| {
                let st = TwoPairState::bell(l, BellLabel::PhiPlus);
                let e = classify(&run(&st, BilateralOp::rot(axis, sign, PairSel::S)));
                PhasedBell { label: e.s, phase: e.phase }
            });
            rows.push(RotationRow { axis, sign, entries });
        }
    }
    rows
}

fn all_pairs() -> impl Iterator<Item = (BellLabel, BellLabel)> {
    BellLabel::ALL.into_iter().flat_map(|s| BellLabel::ALL.into_iter().map(move |t| (s, t)))
}

fn generate_deutsch() -> Vec<DeutschRow> {
    let steps = [
        vec![BilateralOp::rot(Axis::Y, Sign::Plus, PairSel::T)],
        vec![BilateralOp::rot(Axis::Z, Sign::Plus, PairSel::Both)],
        vec![BilateralOp::two(BilateralKind::BiSwap)],
        vec![BilateralOp::rot(Axis::Y, Sign::Minus, PairSel::S)],
    ];
    all_pairs()
        .map(|(s, t)| {
            let mut st = TwoPairState::bell(s, t);
            let mut out = [ProductEntry { phase: ONE, s, t }; 4];
            for (k, ops) in steps.iter().enumerate() {
                for &op in ops {
                    st = run(&st, op);
                }
                out[k] = classify(&st);
            }
            DeutschRow { initial: (s, t), steps: out }
        })
        .collect()
}

/// Bennett table with the branch rotations `B_{S sign} B_{T sign}`.
pub fn generate_bennett_with(sign_a: Sign, sign_b: Sign) -> Vec<BennettRow> {
    all_pairs()
        .map(|(s, t)| {
            let after = run(&TwoPairState::bell(s, t), BilateralOp::two(BilateralKind::BiSwap));
            let step_i = classify(&after);
            let a = classify(&run(&after, BilateralOp::rot(Axis::X, sign_a, PairSel::Both)));
            let b = classify(&run(&after, BilateralOp::rot(Axis::Y, sign_b, PairSel::Both)));
            let discarded = !passes(&a) && !passes(&b);
            BennettRow {
                initial: (s, t),
                step_i,
                branch_a: (!discarded).then_some(a),
                branch_b: (!discarded).then_some(b),
            }
        })
        .collect()
}

pub fn generate_table(which: TableKind) -> Table {
    match which {
        TableKind::Rotations => Table::Rotations(generate_rotations()),
        TableKind::DeutschReplacement => Table::Deutsch(generate_deutsch()),
        TableKind::Bennett => Table::Bennett(generate_bennett_with(Sign::Plus, Sign::Plus)),
    }
}

impl Table {
    pub fn kind(&self) -> TableKind {
        match self {
            Table::Rotations(_) => TableKind::Rotations,
            Table::Deutsch(_) => TableKind::DeutschReplacement,
            Table::Bennett(_) => TableKind::Bennett,
        }
    }

    /// Aligned text in the same format the parsers read.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Table::Rotations(rows) => {
                out.push_str("# bilateral rotation on one pair; columns: Phi+ Phi- Psi+ Psi-\n");
                for r in rows {
                    let _ = write!(out, "{:<4}", rot_name(r.axis, r.sign));
                    for e in &r.entries {
                        let _ = write!(out, " {:<9}", format!("{}:{}", phase_str(e.phase), e.label.ascii()));
                    }
                    out = out.trim_end().to_string();
                    out.push('\n');
                }
            }
            Table::Deutsch(rows) => {
                out.push_str("# initial S T | By_T+ | Bz_S+ Bz_T+ | BiSWAP | By_S-\n");
                for r in rows {
                    let _ = write!(out, "{} |", pair_name(r.initial));
                    for e in &r.steps {
                        let _ = write!(out, " {:<13}", e.cell());
                    }
                    out = out.trim_end().to_string();
                    out.push('\n');
                }
            }
            Table::Bennett(rows) => {
                out.push_str("# initial S T | BiSWAP | branch a Bx_S Bx_T | branch b By_S By_T\n");
                for r in rows {
                    let br = |b: &Option<ProductEntry>| b.map_or("discarded".to_string(), |e| e.labels_cell());
                    let _ = writeln!(
                        out,
                        "{} | {:<12} {:<10} {}",
                        pair_name(r.initial),
                        r.step_i.cell(),
                        br(&r.branch_a),
                        br(&r.branch_b)
                    );
                }
            }
        }
        out
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_label(line: usize, s: &str) -> Result<BellLabel> {
    s.parse().map_err(|_| perr(line, format!("bad Bell label {s:?}")))
}

fn parse_product(line: usize, cell: &str) -> Result<ProductEntry> {
    let parts: Vec<&str> = cell.split(':').collect();
    match parts.as_slice() {
        [ph, s, t] => Ok(ProductEntry {
            phase: parse_phase(ph).map_err(|e| perr(line, e.to_string()))?,
            s: parse_label(line, s)?,
            t: parse_label(line, t)?,
        }),
        [s, t] => Ok(ProductEntry { phase: ONE, s: parse_label(line, s)?, t: parse_label(line, t)? }),
        _ => Err(perr(line, format!("bad cell {cell:?}"))),
    }
}

fn split_row(line: usize, l: &str) -> Result<((BellLabel, BellLabel), Vec<&str>)> {
    let (head, rest) = l.split_once('|').ok_or_else(|| perr(line, "missing '|'"))?;
    let head: Vec<&str> = head.split_whitespace().collect();
    if head.len() != 2 {
        return Err(perr(line, "expected two initial labels"));
    }
    Ok(((parse_label(line, head[0])?, parse_label(line, head[1])?), rest.split_whitespace().collect()))
}

pub fn parse_rotations(text: &str) -> Result<Vec<RotationRow>> {
    let mut rows = Vec::new();
    for (line, l) in data_lines(text) {
        let cells: Vec<&str> = l.split_whitespace().collect();
        if cells.len() != 5 {
            return Err(perr(line, "expected an operator and four cells"));
        }
        let name: Vec<char> = cells[0].chars().collect();
        let (axis, sign) = match name.as_slice() {
            ['B', ax, sg] => (
                Axis::from_letter(*ax).ok_or_else(|| perr(line, "bad axis"))?,
                match sg {
                    '+' => Sign::Plus,
                    '-' => Sign::Minus,
                    _ => return Err(perr(line, "bad sign")),
                },
            ),
            _ => return Err(perr(line, format!("bad operator {:?}", cells[0]))),
        };
        let mut entries = [PhasedBell { label: BellLabel::PhiPlus, phase: ONE }; 4];
        for (k, cell) in cells[1..].iter().enumerate() {
            let (ph, lab) = cell.split_once(':').ok_or_else(|| perr(line, format!("bad cell {cell:?}")))?;
            entries[k] = PhasedBell {
                label: parse_label(line, lab)?,
                phase: parse_phase(ph).map_err(|e| perr(line, e.to_string()))?,
            };
        }
        rows.push(RotationRow { axis, sign, entries });
    }
    Ok(rows)
}

pub fn parse_deutsch(text: &str) -> Result<Vec<DeutschRow>> {
    let mut rows = Vec::new();
    for (line, l) in data_lines(text) {
        let (initial, cells) = split_row(line, l)?;
        if cells.len() != 4 {
            return Err(perr(line, "expected four step cells"));
        }
        let mut steps = [ProductEntry { phase: ONE, s: initial.0, t: initial.1 }; 4];
        for (k, cell) in cells.iter().enumerate() {
            steps[k] = parse_product(line, cell)?;
        }
        rows.push(DeutschRow { initial, steps });
    }
    Ok(rows)
}

pub fn parse_bennett(text: &str) -> Result<Vec<BennettRow>> {
    let mut rows = Vec::new();
    for (line, l) in data_lines(text) {
        let (initial, cells) = split_row(line, l)?;
        if cells.len() != 3 {
            return Err(perr(line, "expected three cells"));
        }
        let branch = |cell: &str| -> Result<Option<ProductEntry>> {
            if cell == "discarded" {
                Ok(None)
            } else {
                parse_product(line, cell).map(Some)
            }
        };
        rows.push(BennettRow {
            initial,
            step_i: parse_product(line, cells[0])?,
            branch_a: branch(cells[1])?,
            branch_b: branch(cells[2])?,
        });
    }
    Ok(rows)
}

pub fn reference_rotations() -> Vec<RotationRow> {
    parse_rotations(TABLE1).expect("bundled rotation table parses")
}

pub fn reference_deutsch() -> Vec<DeutschRow> {
    parse_deutsch(TABLE2).expect("bundled replacement table parses")
}

pub fn reference_bennett() -> Vec<BennettRow> {
    parse_bennett(TABLE3).expect("bundled Bennett table parses")
}

/// The four bilateral steps of the replacement table, in time order.
pub fn replacement_sequence() -> [BilateralOp; 4] {
    [
        BilateralOp::rot(Axis::Y, Sign::Plus, PairSel::T),
        BilateralOp::rot(Axis::Z, Sign::Plus, PairSel::Both),
        BilateralOp::two(BilateralKind::BiSwap),
        BilateralOp::rot(Axis::Y, Sign::Minus, PairSel::S),
    ]
}

/// Distance (after a global-phase fit) between the replacement sequence and
/// BSWAP after BCNOT on two pairs, as 16x16 operators.
pub fn replacement_residual() -> Result<f64> {
    let mut seq = ComplexMatrix::identity(16);
    for op in replacement_sequence() {
        seq = op.matrix()?.checked_mul(&seq)?;
    }
    let bcnot = bilateral_unitary(BilateralKind::BCnot, &[0, 1], 2)?;
    let bswap = bilateral_unitary(BilateralKind::BSwap, &[0, 1], 2)?;
    let target = bswap.checked_mul(&bcnot)?;
    Ok(equal_up_to_global_phase(&seq, &target, 1e-12)?.residual)
}

fn missing_row(row: String) -> Mismatch {
    Mismatch { row, column: "-".into(), expected: "row".into(), got: "missing".into() }
}

pub fn compare_rotations(got: &[RotationRow], expected: &[RotationRow]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for exp in expected {
        let name = rot_name(exp.axis, exp.sign);
        let Some(g) = got.iter().find(|r| r.axis == exp.axis && r.sign == exp.sign) else {
            out.push(missing_row(name));
            continue;
        };
        for (k, (ge, ee)) in g.entries.iter().zip(&exp.entries).enumerate() {
            if ge.label != ee.label || (ge.phase - ee.phase).norm() > 1e-9 {
                out.push(Mismatch {
                    row: name.clone(),
                    column: BellLabel::ALL[k].ascii().into(),
                    expected: format!("{}:{}", phase_str(ee.phase), ee.label.ascii()),
                    got: format!("{}:{}", phase_str(ge.phase), ge.label.ascii()),
                });
            }
        }
    }
    out
}

pub fn compare_deutsch(got: &[DeutschRow], expected: &[DeutschRow]) -> Vec<Mismatch> {
    const COLS: [&str; 4] = ["step i", "step ii", "step iii", "step iv"];
    let mut out = Vec::new();
    for exp in expected {
        let Some(g) = got.iter().find(|r| r.initial == exp.initial) else {
            out.push(missing_row(pair_name(exp.initial)));
            continue;
        };
        for k in 0..4 {
            if !g.steps[k].same(&exp.steps[k]) {
                out.push(Mismatch {
                    row: pair_name(exp.initial),
                    column: COLS[k].into(),
                    expected: exp.steps[k].cell(),
                    got: g.steps[k].cell(),
                });
            }
        }
    }
    out
}

/// Step (i) is compared with phases, the branches on labels only.
pub fn compare_bennett(got: &[BennettRow], expected: &[BennettRow]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    let br = |b: &Option<ProductEntry>| b.map_or("discarded".to_string(), |e| e.labels_cell());
    for exp in expected {
        let row = pair_name(exp.initial);
        let Some(g) = got.iter().find(|r| r.initial == exp.initial) else {
            out.push(missing_row(row));
            continue;
        };
        if !g.step_i.same(&exp.step_i) {
            out.push(Mismatch {
                row: row.clone(),
                column: "step i".into(),
                expected: exp.step_i.cell(),
                got: g.step_i.cell(),
            });
        }
        for (col, ge, ee) in [("branch a", &g.branch_a, &exp.branch_a), ("branch b", &g.branch_b, &exp.branch_b)] {
            let ok = match (ge, ee) {
                (Some(x), Some(y)) => x.same_labels(y),
                (None, None) => true,
                _ => false,
            };
            if !ok {
                out.push(Mismatch { row: row.clone(), column: col.into(), expected: br(ee), got: br(ge) });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::I;

    #[test]
    fn rotations_match_reference() {
        let m = compare_rotations(&generate_rotations(), &reference_rotations());
        assert!(m.is_empty(), "{m:#?}");
    }

    #[test]
    fn rotation_table_spot_checks() {
        let rows = generate_rotations();
        let bz_plus = rows.iter().find(|r| r.axis == Axis::Z && r.sign == Sign::Plus).unwrap();
        assert_eq!(bz_plus.entries[2].label, BellLabel::PsiPlus);
        assert!((bz_plus.entries[2].phase + I).norm() < 1e-12);
    }

    #[test]
    fn deutsch_matches_reference() {
        let m = compare_deutsch(&generate_deutsch(), &reference_deutsch());
        assert!(m.is_empty(), "{m:#?}");
    }

    #[test]
    fn deutsch_first_row_final_column() {
        let rows = generate_deutsch();
        let last = rows[0].steps[3];
        assert_eq!((last.s, last.t), (BellLabel::PhiPlus, BellLabel::PhiPlus));
    }

    #[test]
    fn bennett_matches_reference_for_every_branch_sign() {
        for sa in [Sign::Plus, Sign::Minus] {
            for sb in [Sign::Plus, Sign::Minus] {
                let m = compare_bennett(&generate_bennett_with(sa, sb), &reference_bennett());
                assert!(m.is_empty(), "{sa:?} {sb:?}: {m:#?}");
            }
        }
    }

    #[test]
    fn bennett_psi_plus_row_step_one() {
        let rows = generate_bennett_with(Sign::Plus, Sign::Plus);
        let r = rows.iter().find(|r| r.initial == (BellLabel::PsiPlus, BellLabel::PhiPlus)).unwrap();
        assert_eq!((r.step_i.s, r.step_i.t), (BellLabel::PhiPlus, BellLabel::PsiPlus));
        assert!((r.step_i.phase - I).norm() < 1e-12);
    }

    #[test]
    fn deutsch_sequence_is_swapped_bcnot() {
        let r = replacement_residual().unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn text_round_trips() {
        for kind in [TableKind::Rotations, TableKind::DeutschReplacement, TableKind::Bennett] {
            let t = generate_table(kind);
            let text = t.to_text();
            let back = match kind {
                TableKind::Rotations => Table::Rotations(parse_rotations(&text).unwrap()),
                TableKind::DeutschReplacement => Table::Deutsch(parse_deutsch(&text).unwrap()),
                TableKind::Bennett => Table::Bennett(parse_bennett(&text).unwrap()),
            };
            match (&t, &back) {
                (Table::Rotations(a), Table::Rotations(b)) => assert!(compare_rotations(a, b).is_empty()),
                (Table::Deutsch(a), Table::Deutsch(b)) => assert!(compare_deutsch(a, b).is_empty()),
                (Table::Bennett(a), Table::Bennett(b)) => assert!(compare_bennett(a, b).is_empty()),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn corrupted_row_is_named() {
        let bad = TABLE2.replace("Psi- Psi- | 1:Psi-:Psi-", "Psi- Psi- | -1:Psi-:Psi-");
        let m = compare_deutsch(&generate_deutsch(), &parse_deutsch(&bad).unwrap());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].row, "Psi- Psi-");
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_deutsch("# c\nPhi+ Phi+ | 1:Phi+:Chi 1:Phi+:Phi+ 1:Phi+:Phi+ 1:Phi+:Phi+\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
