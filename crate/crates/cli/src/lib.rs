//! Command implementations behind the `iswap-purify` binary.
//!
//! Every command returns its output as a string so the binary, the tests and
//! the determinism check all see exactly the same bytes.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;

use iswap_purify::bell::{
    compare_bennett, compare_deutsch, compare_rotations, generate_bennett_with, generate_table, parse_bennett,
    parse_deutsch, parse_rotations, reference_bennett, reference_deutsch, reference_rotations, replacement_residual,
    Mismatch, Sign, Table, TableKind,
};
use iswap_purify::bellgen::{all_recipes, Entangler};
use iswap_purify::gates::{check_identity_tol, Identity};
use iswap_purify::hardware::{
    default_evolution_time, find_preset, jc_effective, jc_validate, protocol_times, HardwarePreset, JcEffective,
    JcParams, JcValidation, TimingReport,
};
use iswap_purify::purify::{iterate, PulseError, Stop, Trajectory};
use iswap_purify::rewrite::{
    breeding_template, check_rewrite_equivalence, hashing_template, rewrite, Circuit, Direction, RewriteReport,
    MAX_UNITARY_PAIRS,
};
use iswap_purify::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable naming a directory of `<name>.json` presets.
pub const PRESET_DIR_ENV: &str = "ISWAP_PURIFY_PRESET_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, unreadable or unparseable input.
    Usage(String),
    /// The command ran but a check did not hold.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Check(_) => EXIT_CHECK,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Full-precision float for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, Default)]
pub struct VerifyConfig {
    /// Overrides every per-check tolerance.
    pub tol: Option<f64>,
    /// Directory with `table1.txt`..`table3.txt` replacing the bundled expectations.
    pub tables_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_CHECK
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = write!(out, "{status} {}", c.name);
            if let Some(r) = c.residual {
                let _ = write!(out, " residual={r:.3e}");
            }
            if !c.detail.is_empty() {
                let _ = write!(out, " {}", c.detail);
            }
            out.push('\n');
        }
        let n_fail = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), n_fail);
        out
    }
}

fn residual_check(name: impl Into<String>, residual: f64, tol: f64) -> CheckLine {
    CheckLine { name: name.into(), passed: residual < tol, residual: Some(residual), detail: String::new() }
}

fn table_check(name: &str, mismatches: Vec<Mismatch>) -> CheckLine {
    let detail = mismatches
        .iter()
        .take(4)
        .map(|m| format!("[row {} col {}: expected {} got {}]", m.row, m.column, m.expected, m.got))
        .collect::<Vec<_>>()
        .join(" ");
    CheckLine { name: name.into(), passed: mismatches.is_empty(), residual: None, detail }
}

fn expected_table(dir: Option<&Path>, file: &str) -> CliResult<Option<String>> {
    match dir {
        Some(d) => read_file(&d.join(file)).map(Some),
        None => Ok(None),
    }
}

/// Runs the identity, table, Bell-generation and rewrite checks.
pub fn cmd_verify(cfg: &VerifyConfig) -> CliResult<VerifyReport> {
    let tol = |default: f64| cfg.tol.unwrap_or(default);
    let dir = cfg.tables_dir.as_deref();
    let mut checks = Vec::new();

    for id in Identity::ALL {
        let c = check_identity_tol(id, tol(1e-12));
        checks.push(residual_check(format!("identity {}", id.name()), c.residual, tol(1e-12)));
    }

    let rot_expected = match expected_table(dir, "table1.txt")? {
        Some(t) => parse_rotations(&t)?,
        None => reference_rotations(),
    };
    let deutsch_expected = match expected_table(dir, "table2.txt")? {
        Some(t) => parse_deutsch(&t)?,
        None => reference_deutsch(),
    };
    let bennett_expected = match expected_table(dir, "table3.txt")? {
        Some(t) => parse_bennett(&t)?,
        None => reference_bennett(),
    };
    if let Table::Rotations(rows) = generate_table(TableKind::Rotations) {
        checks.push(table_check("table rotations", compare_rotations(&rows, &rot_expected)));
    }
    if let Table::Deutsch(rows) = generate_table(TableKind::DeutschReplacement) {
        checks.push(table_check("table replacement", compare_deutsch(&rows, &deutsch_expected)));
    }
    checks.push(residual_check("replacement operator", replacement_residual()?, tol(1e-12)));
    for (sa, sb) in [(Sign::Plus, Sign::Plus), (Sign::Minus, Sign::Plus), (Sign::Plus, Sign::Minus), (Sign::Minus, Sign::Minus)] {
        let rows = generate_bennett_with(sa, sb);
        let name = format!("table bennett branches {}{}", sa.symbol(), sb.symbol());
        checks.push(table_check(&name, compare_bennett(&rows, &bennett_expected)));
    }

    for r in all_recipes() {
        let e = r.execute()?;
        let ent = match r.entangler {
            Entangler::ISwap => "iswap",
            Entangler::SqrtSwap => "sqrtswap",
        };
        let mut line = residual_check(format!("bellgen {} {}", r.target.ascii(), ent), 1.0 - e.fidelity_to_target, tol(1e-12));
        let budget = match r.entangler {
            Entangler::ISwap => 2,
            Entangler::SqrtSwap => 3,
        };
        if r.rotation_slots() != budget || r.two_qubit_gates() != 1 {
            line.passed = false;
            line.detail = format!("slots {} two-qubit {}", r.rotation_slots(), r.two_qubit_gates());
        }
        checks.push(line);
    }

    let mut circuits = Vec::new();
    for s in 1..16u8 {
        let bits: Vec<u8> = (0..4).map(|i| (s >> (3 - i)) & 1).collect();
        let label: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
        circuits.push((format!("rewrite hashing s={label}"), hashing_template(2, &bits)?));
    }
    circuits.push(("rewrite breeding n=2".to_string(), breeding_template(2)?));
    for (name, c) in circuits {
        for dir in [Direction::Forward, Direction::Reversed] {
            let r = rewrite(&c, dir)?;
            let eq = check_rewrite_equivalence(&c, &r)?;
            let mut line = residual_check(format!("{name} {dir:?}"), eq.residual, tol(1e-10));
            line.passed &= eq.equivalent || cfg.tol.is_some();
            if r.gate_counts().cnot_class != 0 {
                line.passed = false;
                line.detail = format!("{} CNOT-class gates left", r.gate_counts().cnot_class);
            }
            checks.push(line);
        }
    }
    Ok(VerifyReport { checks })
}

// ---------------------------------------------------------------- purify

#[derive(Debug, Clone)]
pub struct PurifyConfig {
    pub f0: Vec<f64>,
    pub eps: Vec<f64>,
    pub target: f64,
    pub max_rounds: usize,
}

impl Default for PurifyConfig {
    fn default() -> Self {
        PurifyConfig { f0: vec![0.7], eps: vec![0.0], target: 0.99, max_rounds: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct PurifyOutput {
    pub csv: String,
    pub trajectories: Vec<Trajectory>,
}

impl PurifyOutput {
    /// One line per grid point with the stop reason.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for t in &self.trajectories {
            let reason = match t.stop {
                Stop::ReachedTarget => "reached-target",
                Stop::MaxRounds => "max-rounds",
                Stop::NonConvergent => "non-convergent",
            };
            let _ = writeln!(out, "F0={} eps={} rounds={} final={:.6} {reason}", t.f0, t.epsilon, t.rounds(), t.final_fidelity());
        }
        out
    }
}

pub const PURIFY_HEADER: [&str; 6] = ["F0", "eps", "round", "F", "pass_prob", "expected_pairs"];

pub fn cmd_purify(cfg: &PurifyConfig) -> CliResult<PurifyOutput> {
    if cfg.f0.is_empty() || cfg.eps.is_empty() {
        return Err(CliError::Usage("F0 and eps grids must be non-empty".into()));
    }
    if let Some(f) = cfg.f0.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(CliError::Usage(format!("F0 {f} outside [0, 1]")));
    }
    if !(cfg.target > 0.5 && cfg.target <= 1.0) {
        return Err(CliError::Usage(format!("target {} outside (0.5, 1]", cfg.target)));
    }
    if cfg.max_rounds == 0 {
        return Err(CliError::Usage("max-rounds must be positive".into()));
    }
    let mut errs = Vec::with_capacity(cfg.eps.len());
    for &e in &cfg.eps {
        errs.push(PulseError::new(e).map_err(|err| CliError::Usage(err.to_string()))?);
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(PURIFY_HEADER).map_err(csv_err)?;
    let mut trajectories = Vec::new();
    for &f0 in &cfg.f0 {
        for &err in &errs {
            let t = iterate(f0, err, cfg.target, cfg.max_rounds)?;
            for row in &t.rows {
                w.write_record([
                    fmt_f64(f0),
                    fmt_f64(err.epsilon()),
                    row.round.to_string(),
                    fmt_f64(row.fidelity),
                    fmt_f64(row.pass_probability),
                    fmt_f64(row.expected_pairs),
                ])
                .map_err(csv_err)?;
            }
            trajectories.push(t);
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    let csv = String::from_utf8(bytes).expect("CSV of ASCII numbers");
    Ok(PurifyOutput { csv, trajectories })
}

// ---------------------------------------------------------------- rewrite

#[derive(Debug, Clone)]
pub struct RewriteOutput {
    pub circuit: String,
    pub report: Option<RewriteReport>,
}

/// Rewrites circuit text; an input with no statements gives empty output.
pub fn cmd_rewrite(text: &str, dir: Direction) -> CliResult<RewriteOutput> {
    let blank = text.lines().all(|l| l.split('#').next().unwrap_or("").trim().is_empty());
    if blank {
        return Ok(RewriteOutput { circuit: String::new(), report: None });
    }
    let c = Circuit::from_text(text)?;
    let r = rewrite(&c, dir)?;
    let equivalence = if c.n_pairs() <= MAX_UNITARY_PAIRS { Some(check_rewrite_equivalence(&c, &r)?) } else { None };
    let report = RewriteReport {
        direction: dir,
        before: c.gate_counts(),
        after: r.gate_counts(),
        frames: r.frames().to_vec(),
        relabel: r.relabel().to_vec(),
        equivalence,
    };
    if let Some(eq) = report.equivalence.filter(|e| !e.equivalent) {
        return Err(CliError::Check(format!("rewritten circuit is not equivalent (residual {:.3e})", eq.residual)));
    }
    Ok(RewriteOutput { circuit: r.to_text(), report: Some(report) })
}

// ---------------------------------------------------------------- timing

#[derive(Debug, Clone)]
pub enum PresetSource {
    Name(String),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct TimingOutput {
    pub report: TimingReport,
    pub json: String,
    pub table: String,
}

pub fn resolve_preset(src: &PresetSource, preset_dir: Option<&Path>) -> CliResult<HardwarePreset> {
    match src {
        PresetSource::Name(n) => Ok(find_preset(n, preset_dir)?),
        PresetSource::File(p) => Ok(HardwarePreset::from_json(&read_file(p)?)?),
    }
}

pub fn cmd_timing(src: &PresetSource, preset_dir: Option<&Path>) -> CliResult<TimingOutput> {
    let preset = resolve_preset(src, preset_dir)?;
    let report = protocol_times(&preset)?;
    Ok(TimingOutput { json: report.to_json(), table: report.to_table(), report })
}

// ---------------------------------------------------------------- tables

fn table_file(kind: TableKind) -> &'static str {
    match kind {
        TableKind::Rotations => "table1.txt",
        TableKind::DeutschReplacement => "table2.txt",
        TableKind::Bennett => "table3.txt",
    }
}

/// Regenerates the requested tables (all three by default). With `out`, each
/// is written to `out/tableN.txt` in the format `verify --tables-dir` reads.
pub fn cmd_tables(which: Option<TableKind>, out: Option<&Path>) -> CliResult<String> {
    let kinds = match which {
        Some(k) => vec![k],
        None => vec![TableKind::Rotations, TableKind::DeutschReplacement, TableKind::Bennett],
    };
    let mut text = String::new();
    for k in kinds {
        let t = generate_table(k).to_text();
        if let Some(dir) = out {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
            write_file(&dir.join(table_file(k)), &t)?;
        }
        text.push_str(&t);
    }
    Ok(text)
}

// ---------------------------------------------------------------- jc

#[derive(Debug, Clone, Serialize)]
pub struct JcOutput {
    pub params: JcParams,
    pub effective: JcEffective,
    pub validation: Option<JcValidation>,
}

pub const JC_STEPS: usize = 4000;

pub fn cmd_jc(params_json: &str, validate: bool) -> CliResult<String> {
    let params: JcParams =
        serde_json::from_str(params_json).map_err(|e| CliError::Usage(format!("JC parameters: {e}")))?;
    let effective = jc_effective(&params)?;
    let validation = if validate {
        let t = default_evolution_time(&params)?;
        Some(jc_validate(&params, t, JC_STEPS)?)
    } else {
        None
    };
    let out = JcOutput { params, effective, validation };
    Ok(serde_json::to_string_pretty(&out).expect("JC output serializes") + "\n")
}

// ---------------------------------------------------------------- helpers for the binary

pub fn write_or_return(out: Option<&Path>, text: &str) -> CliResult<Option<String>> {
    match out {
        Some(p) => write_file(p, text).map(|_| None),
        None => Ok(Some(text.to_string())),
    }
}

pub fn read_input(path: &Path) -> CliResult<String> {
    read_file(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_passes_on_fresh_build() {
        let r = cmd_verify(&VerifyConfig::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.exit_code(), EXIT_OK);
    }

    #[test]
    fn tiny_tolerance_fails_some_checks() {
        let r = cmd_verify(&VerifyConfig { tol: Some(1e-20), tables_dir: None }).unwrap();
        assert_eq!(r.exit_code(), EXIT_CHECK);
        assert!(r.failures().any(|c| c.name.starts_with("identity")));
        // table label comparisons do not depend on the tolerance
        assert!(r.checks.iter().filter(|c| c.name.starts_with("table")).all(|c| c.passed));
    }

    #[test]
    fn purify_csv_shape() {
        let out = cmd_purify(&PurifyConfig::default()).unwrap();
        let mut lines = out.csv.lines();
        assert_eq!(lines.next().unwrap(), "F0,eps,round,F,pass_prob,expected_pairs");
        let fs: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
        assert!(fs.windows(2).all(|w| w[1] > w[0]));
        assert!(*fs.last().unwrap() >= 0.99);
    }

    #[test]
    fn purify_fixed_point_is_one_row() {
        let cfg = PurifyConfig { f0: vec![0.5], ..PurifyConfig::default() };
        let out = cmd_purify(&cfg).unwrap();
        assert_eq!(out.csv.lines().count(), 2);
        assert_eq!(out.trajectories[0].stop, Stop::NonConvergent);
        assert!(out.summary().contains("non-convergent"));
    }

    #[test]
    fn purify_bad_grid_is_usage_error() {
        for cfg in [
            PurifyConfig { f0: vec![], ..PurifyConfig::default() },
            PurifyConfig { f0: vec![1.2], ..PurifyConfig::default() },
            PurifyConfig { eps: vec![1.0], ..PurifyConfig::default() },
            PurifyConfig { max_rounds: 0, ..PurifyConfig::default() },
        ] {
            assert_eq!(cmd_purify(&cfg).unwrap_err().exit_code(), EXIT_USAGE);
        }
    }

    #[test]
    fn full_precision_cells() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn rewrite_single_bcnot() {
        let out = cmd_rewrite("PAIRS 2\nBCNOT 0 1\n", Direction::Forward).unwrap();
        let rep = out.report.unwrap();
        assert_eq!(rep.after.biswap, 1);
        assert_eq!(rep.after.cnot_class, 0);
        assert_eq!(rep.before.two_qubit_native, 2);
        assert_eq!(rep.after.two_qubit_native, 1);
        assert!(Circuit::from_text(&out.circuit).is_ok());
    }

    #[test]
    fn rewrite_empty_and_bad_input() {
        assert_eq!(cmd_rewrite("", Direction::Forward).unwrap().circuit, "");
        assert_eq!(cmd_rewrite("# nothing\n\n", Direction::Forward).unwrap().circuit, "");
        let err = cmd_rewrite("PAIRS 2\nBCNOT 0 7\n", Direction::Forward).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn timing_unknown_preset() {
        let err = cmd_timing(&PresetSource::Name("nope".into()), None).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn jc_without_validation() {
        let p = JcParams::symmetric(1.0e10, 1.0e9, 0.05, 5);
        let out = cmd_jc(&serde_json::to_string(&p).unwrap(), false).unwrap();
        assert!(out.contains("j_eff"));
        assert!(out.contains("\"validation\": null"));
        assert!(cmd_jc("{", false).is_err());
    }
}
