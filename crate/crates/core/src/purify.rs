//! Purification rounds on Bell-diagonal and general pair states.
//!
//! The analytic maps are closed forms; the oracle runs the round on the full
//! 16-dim density matrix `rho_S (x) rho_T`, projects the measured pair onto
//! equal z outcomes and renormalizes the kept pair.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bell::{
    bell_vector, bilateral_unitary, BellLabel, BilateralKind, BilateralOp, PairSel, Party, ProductEntry, Sign,
};
use crate::error::{invalid, Result};
use crate::gates::{self, embed, equal_up_to_global_phase, inner, Axis, ComplexMatrix, C64, ONE};

/// Weights of Phi+, Psi-, Psi+, Phi- (in that order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonal {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BellDiagonal {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let w = [a, b, c, d];
        if w.iter().any(|x| !x.is_finite() || *x < -1e-12) {
            return invalid("Bell-diagonal weights must be non-negative");
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return invalid(format!("Bell-diagonal weights sum to {sum}"));
        }
        Ok(BellDiagonal { a, b, c, d })
    }

    /// Werner form around an arbitrary Bell state.
    pub fn werner_about(f: f64, reference: BellLabel) -> Result<Self> {
        check_fidelity(f)?;
        let q = (1.0 - f) / 3.0;
        let mut w = BellDiagonal { a: q, b: q, c: q, d: q };
        w.set(reference, f);
        Ok(w)
    }

    pub fn weight(&self, l: BellLabel) -> f64 {
        match l {
            BellLabel::PhiPlus => self.a,
            BellLabel::PsiMinus => self.b,
            BellLabel::PsiPlus => self.c,
            BellLabel::PhiMinus => self.d,
        }
    }

    fn set(&mut self, l: BellLabel, v: f64) {
        match l {
            BellLabel::PhiPlus => self.a = v,
            BellLabel::PsiMinus => self.b = v,
            BellLabel::PsiPlus => self.c = v,
            BellLabel::PhiMinus => self.d = v,
        }
    }

    pub fn total(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    /// Unnormalized weights from a label function, then normalized.
    fn from_fn(mut w: impl FnMut(BellLabel) -> f64) -> (Self, f64) {
        let mut out = BellDiagonal { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
        for l in BellLabel::ALL {
            out.set(l, w(l));
        }
        let t = out.total();
        if t > 0.0 {
            for l in BellLabel::ALL {
                out.set(l, out.weight(l) / t);
            }
        }
        (out, t)
    }

    /// Applies a label permutation (a unilateral Pauli, for instance).
    pub fn relabel(&self, map: impl Fn(BellLabel) -> BellLabel) -> Self {
        let mut out = BellDiagonal { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
        for l in BellLabel::ALL {
            out.set(map(l), out.weight(map(l)) + self.weight(l));
        }
        out
    }

    pub fn to_density(&self) -> PairDensity {
        let mut m = ComplexMatrix::zeros(4);
        for l in BellLabel::ALL {
            m = &m + &ComplexMatrix::outer(&bell_vector(l)).scale(C64::new(self.weight(l), 0.0));
        }
        PairDensity(m)
    }
}

pub fn werner(f: f64) -> Result<BellDiagonal> {
    BellDiagonal::werner_about(f, BellLabel::PhiPlus)
}

fn check_fidelity(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return invalid(format!("fidelity {f} outside [0, 1]"));
    }
    Ok(())
}

/// 4x4 density matrix of one shared pair, Alice's qubit first.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDensity(ComplexMatrix);

impl PairDensity {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 4 {
            return invalid("pair density must be 4x4");
        }
        if !m.is_hermitian(1e-12) {
            return invalid("density matrix is not Hermitian");
        }
        if (m.trace() - ONE).norm() > 1e-12 {
            return invalid("density matrix trace is not 1");
        }
        let rho = PairDensity(m);
        if rho.min_eigenvalue() < -1e-10 {
            return invalid("density matrix is not positive semidefinite");
        }
        Ok(rho)
    }

    pub fn pure(label: BellLabel) -> Self {
        PairDensity(ComplexMatrix::outer(&bell_vector(label)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn fidelity(&self, l: BellLabel) -> f64 {
        let v = bell_vector(l);
        inner(&v, &self.0.apply(&v).expect("4-dim")).re
    }

    /// Diagonal of the state in the Bell basis.
    pub fn bell_weights(&self) -> BellDiagonal {
        let mut out = BellDiagonal { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
        for l in BellLabel::ALL {
            out.set(l, self.fidelity(l));
        }
        out
    }

    /// Smallest eigenvalue, by Jacobi sweeps on the real symmetric 8x8 embedding.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = 4;
        let mut a = [[0.0f64; 8]; 8];
        for i in 0..n {
            for j in 0..n {
                let z = self.0[(i, j)];
                a[i][j] = z.re;
                a[i + n][j + n] = z.re;
                a[i][j + n] = -z.im;
                a[i + n][j] = z.im;
            }
        }
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..8 {
                for q in (p + 1)..8 {
                    off += a[p][q] * a[p][q];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..8 {
                for q in (p + 1)..8 {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    for k in 0..8 {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = cs * akp - sn * akq;
                        a[k][q] = sn * akp + cs * akq;
                    }
                    for k in 0..8 {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = cs * apk - sn * aqk;
                        a[q][k] = sn * apk + cs * aqk;
                    }
                }
            }
        }
        (0..8).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
    }
}

/// Interaction-time error: `2Jt = pi/2 + epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseError {
    epsilon: f64,
}

impl PulseError {
    pub const NONE: PulseError = PulseError { epsilon: 0.0 };

    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon.abs() >= FRAC_PI_4 {
            return invalid(format!("pulse error {epsilon} outside (-pi/4, pi/4)"));
        }
        Ok(PulseError { epsilon })
    }

    pub fn epsilon(self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub kept: BellDiagonal,
    pub kept_density: Option<PairDensity>,
    pub pass_probability: f64,
    pub reference_fidelity: f64,
    pub reference: BellLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `B^x` branch; inputs Werner about Phi+.
    A,
    /// `B^y` branch; inputs Werner about Psi-.
    B,
}

impl Variant {
    pub fn input_reference(self) -> BellLabel {
        match self {
            Variant::A => BellLabel::PhiPlus,
            Variant::B => BellLabel::PsiMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasuredPair {
    Source,
    Target,
}

/// Which pair the oracle measures unless told otherwise.
pub const DEFAULT_MEASURED: MeasuredPair = MeasuredPair::Target;

/// Bennett round with the BiSWAP; the kept pair is compared with Phi-.
pub fn bennett_round_analytic(f: f64) -> Result<RoundResult> {
    bennett_round_with_error(f, PulseError::NONE)
}

/// `(k1, k2, k3)` for interaction-time error `epsilon`.
pub fn k_coefficients(err: PulseError) -> (f64, f64, f64) {
    let e2 = 2.0 * err.epsilon;
    let k1 = (1.0 + e2.cos()) / 2.0;
    let k2 = (1.0 - e2.cos()) / 2.0;
    let k3 = 1.0 + k2 + e2.sin().powi(2) / 4.0;
    (k1, k2, k3)
}

pub fn bennett_round_with_error(f: f64, err: PulseError) -> Result<RoundResult> {
    check_fidelity(f)?;
    let (k1, k2, k3) = k_coefficients(err);
    let s2 = (2.0 * err.epsilon).sin().powi(2);
    let q = (1.0 - f) / 3.0;
    let (kept, pass) = BellDiagonal::from_fn(|l| match l {
        BellLabel::PhiMinus => k1 * k1 * f * f + k3 * q * q,
        BellLabel::PhiPlus => k1 * k2 * f * f + (2.0 - s2 / 4.0) * q * q,
        BellLabel::PsiPlus => 2.0 * f * q,
        BellLabel::PsiMinus => 2.0 * q * q,
    });
    Ok(RoundResult {
        kept,
        kept_density: None,
        pass_probability: pass,
        reference_fidelity: kept.weight(BellLabel::PhiMinus),
        reference: BellLabel::PhiMinus,
    })
}

/// F' for the error-free round, written out directly.
pub fn eq25(f: f64) -> f64 {
    let q = (1.0 - f) / 3.0;
    (f * f + q * q) / (f * f + 2.0 * f * q + 5.0 * q * q)
}

/// F' with pulse error, in the `k1, k2, k3` form.
pub fn eq28(f: f64, err: PulseError) -> f64 {
    let (k1, k2, k3) = k_coefficients(err);
    let q = (1.0 - f) / 3.0;
    (k1 * k1 * f * f + k3 * q * q) / (k1 * f * f + 2.0 * f * q + (5.0 + k2) * q * q)
}

/// Reorders `rho_S (x) rho_T` from (a_S, b_S, a_T, b_T) into the wire order
/// (a_S, a_T, b_S, b_T).
fn joint(rho_s: &PairDensity, rho_t: &PairDensity) -> ComplexMatrix {
    let prod = rho_s.0.kron(&rho_t.0);
    let perm: Vec<usize> = (0..16)
        .map(|i| {
            let (a_s, b_s, a_t, b_t) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
            (a_s << 3) | (a_t << 2) | (b_s << 1) | b_t
        })
        .collect();
    let p = ComplexMatrix::permutation(&perm);
    &(&p * &prod) * &p.dagger()
}

/// Projects onto equal outcomes on the measured pair and returns the
/// unnormalized kept 4x4 block.
fn project_and_keep(rho: &ComplexMatrix, measured: MeasuredPair) -> ComplexMatrix {
    let mut kept = ComplexMatrix::zeros(4);
    // bit positions in the 16-dim index: a_S=3, a_T=2, b_S=1, b_T=0
    let (ma, mb, ka, kb) = match measured {
        MeasuredPair::Target => (2, 0, 3, 1),
        MeasuredPair::Source => (3, 1, 2, 0),
    };
    let idx = |ka_v: usize, kb_v: usize, m: usize| (ka_v << ka) | (kb_v << kb) | (m << ma) | (m << mb);
    for m in 0..2 {
        for i in 0..4 {
            for j in 0..4 {
                let r = idx(i >> 1, i & 1, m);
                let c = idx(j >> 1, j & 1, m);
                kept[(i, j)] += rho[(r, c)];
            }
        }
    }
    kept
}

fn finish(kept_raw: ComplexMatrix, reference: BellLabel) -> Result<RoundResult> {
    let pass = kept_raw.trace().re;
    if pass <= 1e-15 {
        return invalid("round never passes for this input");
    }
    let rho = PairDensity(kept_raw.scale(C64::new(1.0 / pass, 0.0)));
    let kept = rho.bell_weights();
    Ok(RoundResult {
        kept,
        reference_fidelity: rho.fidelity(reference),
        kept_density: Some(rho),
        pass_probability: pass,
        reference,
    })
}

/// Pass and fail probabilities of a round, for completeness checks.
pub fn outcome_probabilities(rho_s: &PairDensity, rho_t: &PairDensity, variant: Variant, err: PulseError) -> (f64, f64) {
    let rho = evolve_bennett(rho_s, rho_t, variant, err);
    let pass = project_and_keep(&rho, DEFAULT_MEASURED).trace().re;
    let total = rho.trace().re;
    (pass, total - pass)
}

fn biswap_with_error(err: PulseError) -> ComplexMatrix {
    let u = gates::xy_evolution(FRAC_PI_2 + err.epsilon).expect("finite angle");
    // (a_S, a_T) are wires 0,1 and (b_S, b_T) are wires 2,3
    &embed(&u, &[0, 1], 4).expect("wires") * &embed(&u, &[2, 3], 4).expect("wires")
}

fn evolve_bennett(rho_s: &PairDensity, rho_t: &PairDensity, variant: Variant, err: PulseError) -> ComplexMatrix {
    let axis = match variant {
        Variant::A => Axis::X,
        Variant::B => Axis::Y,
    };
    let rot = BilateralOp::rot(axis, Sign::Plus, PairSel::Both).matrix().expect("valid op");
    let u = &rot * &biswap_with_error(err);
    u.conjugate(&joint(rho_s, rho_t)).expect("16-dim")
}

pub fn bennett_round_oracle(
    rho_s: &PairDensity,
    rho_t: &PairDensity,
    variant: Variant,
    err: PulseError,
) -> Result<RoundResult> {
    bennett_round_oracle_measuring(rho_s, rho_t, variant, err, DEFAULT_MEASURED)
}

pub fn bennett_round_oracle_measuring(
    rho_s: &PairDensity,
    rho_t: &PairDensity,
    variant: Variant,
    err: PulseError,
    measured: MeasuredPair,
) -> Result<RoundResult> {
    let rho = evolve_bennett(rho_s, rho_t, variant, err);
    finish(project_and_keep(&rho, measured), BellLabel::PhiMinus)
}

/// Bilateral CPF action on a Bell-pair product.
pub fn cpf_rule(s: BellLabel, t: BellLabel) -> ProductEntry {
    let (phase, s2, t2) = match (s.is_psi(), t.is_psi()) {
        (false, false) => (ONE, s, t),
        (true, true) => (-ONE, s.flip_sign(), t.flip_sign()),
        (false, true) => (ONE, s.flip_sign(), t),
        (true, false) => (ONE, s, t.flip_sign()),
    };
    ProductEntry { phase, s: s2, t: t2 }
}

/// The rule table as commonly printed, which differs from the unitary on the
/// rows whose source is a Psi state.
pub fn cpf_rule_printed(s: BellLabel, t: BellLabel) -> ProductEntry {
    let flip_family = |l: BellLabel| {
        let (a, p) = l.bits();
        BellLabel::from_bits(a ^ 1, p)
    };
    match (s.is_psi(), t.is_psi()) {
        (false, false) => ProductEntry { phase: ONE, s, t },
        (true, true) => ProductEntry { phase: -ONE, s: s.flip_sign(), t: flip_family(t).flip_sign() },
        (false, true) => ProductEntry { phase: ONE, s: s.flip_sign(), t },
        (true, false) => ProductEntry { phase: ONE, s: s.flip_sign(), t: t.flip_sign() },
    }
}

/// `B^y_+` on one pair: Phi+ -> Phi+, Phi- -> -Psi+, Psi+ -> Phi-, Psi- -> Psi-.
fn by_plus_label(l: BellLabel) -> BellLabel {
    let (a, p) = l.bits();
    BellLabel::from_bits(p, a)
}

/// CPF round from the rule table: CPF, then `B^y_{T+}`, measure T, keep S.
pub fn cpf_round(f: f64) -> Result<RoundResult> {
    let w = werner(f)?;
    let mut acc = BellDiagonal { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
    for s in BellLabel::ALL {
        for t in BellLabel::ALL {
            let e = cpf_rule(s, t);
            if !by_plus_label(e.t).is_psi() {
                let v = acc.weight(e.s) + w.weight(s) * w.weight(t);
                acc.set(e.s, v);
            }
        }
    }
    let (kept, pass) = BellDiagonal::from_fn(|l| acc.weight(l));
    Ok(RoundResult {
        kept,
        kept_density: None,
        pass_probability: pass,
        reference_fidelity: kept.weight(BellLabel::PhiPlus),
        reference: BellLabel::PhiPlus,
    })
}

/// CPF round on the 16-dim density matrix.
pub fn cpf_round_oracle(rho_s: &PairDensity, rho_t: &PairDensity) -> Result<RoundResult> {
    let cpf = bilateral_unitary(BilateralKind::BCpf, &[0, 1], 2)?;
    let by = BilateralOp::rot(Axis::Y, Sign::Plus, PairSel::T).matrix()?;
    let u = &by * &cpf;
    let rho = u.conjugate(&joint(rho_s, rho_t))?;
    finish(project_and_keep(&rho, MeasuredPair::Target), BellLabel::PhiPlus)
}

fn twirl_group() -> &'static [ComplexMatrix] {
    static GROUP: OnceLock<Vec<ComplexMatrix>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let gens: Vec<ComplexMatrix> = Axis::ALL
            .iter()
            .map(|&axis| bilateral_unitary(BilateralKind::Rot { axis, sign: Sign::Plus }, &[0], 1).expect("one pair"))
            .collect();
        let mut group = vec![ComplexMatrix::identity(4)];
        let mut frontier = group.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for g in &frontier {
                for h in &gens {
                    let p = h * g;
                    let known = group.iter().chain(&next).any(|k| equal_up_to_global_phase(k, &p, 1e-9).unwrap().equal);
                    if !known {
                        next.push(p);
                    }
                }
            }
            group.extend(next.iter().cloned());
            frontier = next;
        }
        group
    })
}

/// Unilateral Pauli on Alice that maps Psi- to `reference`.
fn to_singlet_frame(reference: BellLabel) -> ComplexMatrix {
    let axis = match reference {
        BellLabel::PsiMinus => return ComplexMatrix::identity(4),
        BellLabel::PhiMinus => Axis::X,
        BellLabel::PsiPlus => Axis::Z,
        BellLabel::PhiPlus => Axis::Y,
    };
    bilateral_unitary(BilateralKind::UnilateralPi { axis, party: Party::Alice }, &[0], 1).expect("one pair")
}

/// Group average over the bilateral rotations, applied in the frame where
/// `reference` plays the singlet's role.
pub fn twirl_to_werner(rho: &PairDensity, reference: BellLabel) -> BellDiagonal {
    let v = to_singlet_frame(reference);
    let moved = v.dagger().conjugate(&rho.0).expect("4x4");
    let group = twirl_group();
    let mut acc = ComplexMatrix::zeros(4);
    for g in group {
        acc = &acc + &g.conjugate(&moved).expect("4x4");
    }
    let avg = acc.scale(C64::new(1.0 / group.len() as f64, 0.0));
    PairDensity(v.conjugate(&avg).expect("4x4")).bell_weights()
}

pub fn twirl_group_order() -> usize {
    twirl_group().len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub round: usize,
    pub fidelity: f64,
    pub pass_probability: f64,
    pub expected_pairs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stop {
    ReachedTarget,
    MaxRounds,
    NonConvergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub f0: f64,
    pub epsilon: f64,
    pub rows: Vec<TrajectoryRow>,
    pub stop: Stop,
}

impl Trajectory {
    pub fn rounds(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn final_fidelity(&self) -> f64 {
        self.rows.last().expect("row 0 always present").fidelity
    }
}

/// Repeats the round (re-twirling to Werner form in between) until `target`.
/// Row 0 is the input; expected pairs compound as `2 / p_pass` per round.
pub fn iterate(f0: f64, err: PulseError, target: f64, max_rounds: usize) -> Result<Trajectory> {
    check_fidelity(f0)?;
    if !(target <= 1.0) {
        return invalid(format!("target {target} above 1"));
    }
    let mut rows = vec![TrajectoryRow { round: 0, fidelity: f0, pass_probability: 1.0, expected_pairs: 1.0 }];
    let mut f = f0;
    let mut pairs = 1.0;
    let stop = loop {
        if f >= target {
            break Stop::ReachedTarget;
        }
        if rows.len() > max_rounds {
            break Stop::MaxRounds;
        }
        let r = bennett_round_with_error(f, err)?;
        if r.reference_fidelity <= f {
            break Stop::NonConvergent;
        }
        f = r.reference_fidelity;
        pairs *= 2.0 / r.pass_probability;
        rows.push(TrajectoryRow { round: rows.len(), fidelity: f, pass_probability: r.pass_probability, expected_pairs: pairs });
    };
    Ok(Trajectory { f0, epsilon: err.epsilon, rows, stop })
}

/// Smallest fidelity above 1/2 where the round stops improving, by bisection.
pub fn breakeven_fidelity(err: PulseError) -> Option<f64> {
    let g = |f: f64| eq28(f, err) - f;
    if g(0.5) >= 0.0 {
        return Some(0.5);
    }
    let mut hi = None;
    for k in 1..1000 {
        let f = 0.5 + 0.0005 * k as f64;
        if g(f) > 0.0 {
            hi = Some(f);
            break;
        }
    }
    let (mut lo, mut hi) = (0.5, hi?);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
