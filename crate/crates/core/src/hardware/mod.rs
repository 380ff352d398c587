//! Gate-timing model, device presets and the dispersive-coupling calculator.
//!
//! Every time is in seconds. A preset either gives coupling and rotation
//! frequencies plus the convention used to turn them into times, or gives the
//! gate times directly.

mod jc;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use jc::{default_evolution_time, jc_effective, jc_validate, JcEffective, JcParams, JcValidation, DISPERSIVE_LIMIT};

/// Reduced Planck constant in eV s.
pub const HBAR_EV_S: f64 = 6.582119569e-16;
/// Planck constant in eV s.
pub const H_EV_S: f64 = 4.135667696e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "rad_per_s")]
    RadPerS,
    #[serde(rename = "Hz_cyclic")]
    HzCyclic,
    #[serde(rename = "MHz_cyclic")]
    MHzCyclic,
    #[serde(rename = "GHz_cyclic")]
    GHzCyclic,
    #[serde(rename = "meV")]
    MilliElectronVolt,
    #[serde(rename = "eV")]
    ElectronVolt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    /// Angular frequency in rad/s. Energies use `omega = E / hbar`.
    pub fn angular(&self) -> f64 {
        match self.unit {
            Unit::RadPerS => self.value,
            Unit::MilliElectronVolt => self.value * 1e-3 / HBAR_EV_S,
            Unit::ElectronVolt => self.value / HBAR_EV_S,
            _ => 2.0 * PI * self.cyclic(),
        }
    }

    /// Cyclic frequency in Hz. Energies use `f = E / h`.
    pub fn cyclic(&self) -> f64 {
        match self.unit {
            Unit::RadPerS => self.value / (2.0 * PI),
            Unit::HzCyclic => self.value,
            Unit::MHzCyclic => self.value * 1e6,
            Unit::GHzCyclic => self.value * 1e9,
            Unit::MilliElectronVolt => self.value * 1e-3 / H_EV_S,
            Unit::ElectronVolt => self.value / H_EV_S,
        }
    }

    fn scaled(&self, c: f64) -> Self {
        Quantity { value: self.value * c, unit: self.unit }
    }
}

/// How `tau = pi / (4 x)` reads a frequency: `x = omega` or `x = f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    #[serde(rename = "ANGULAR")]
    Angular,
    #[serde(rename = "CYCLIC")]
    Cyclic,
}

impl Convention {
    fn rate(self, q: &Quantity) -> f64 {
        match self {
            Convention::Angular => q.angular(),
            Convention::Cyclic => q.cyclic(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Angular => "ANGULAR",
            Convention::Cyclic => "CYCLIC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingSource {
    Frequencies {
        coupling: Quantity,
        rotation: Quantity,
        /// Isotropic exchange `J_H`, for sqrt(SWAP) hardware.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        heisenberg: Option<Quantity>,
        convention: Convention,
    },
    Direct {
        tau_iswap: f64,
        tau_rot: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_sqrtswap: Option<f64>,
    },
}

/// A printed total that the formulas do not reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub printed: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwarePreset {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub timing: TimingSource,
    #[serde(default)]
    pub dephasing_time: Option<f64>,
    #[serde(default)]
    pub measurement_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<Discrepancy>,
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return invalid(format!("{what} must be positive, got {v}"));
    }
    Ok(())
}

impl HardwarePreset {
    pub fn validate(&self) -> Result<()> {
        match &self.timing {
            TimingSource::Frequencies { coupling, rotation, heisenberg, .. } => {
                check_positive("coupling", coupling.value)?;
                check_positive("rotation frequency", rotation.value)?;
                if let Some(h) = heisenberg {
                    check_positive("Heisenberg coupling", h.value)?;
                }
            }
            TimingSource::Direct { tau_iswap, tau_rot, tau_sqrtswap } => {
                check_positive("tau_iswap", *tau_iswap)?;
                check_positive("tau_rot", *tau_rot)?;
                if let Some(t) = tau_sqrtswap {
                    check_positive("tau_sqrtswap", *t)?;
                }
            }
        }
        for (what, v) in [("dephasing_time", self.dephasing_time), ("measurement_time", self.measurement_time)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return invalid(format!("{what} must be non-negative"));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: HardwarePreset =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("preset serializes") + "\n"
    }

    pub fn convention(&self) -> Option<Convention> {
        match &self.timing {
            TimingSource::Frequencies { convention, .. } => Some(*convention),
            TimingSource::Direct { .. } => None,
        }
    }

    /// Same device with every frequency multiplied by `c` (times divided by `c`).
    pub fn scaled(&self, c: f64) -> Self {
        let mut p = self.clone();
        p.timing = match &self.timing {
            TimingSource::Frequencies { coupling, rotation, heisenberg, convention } => TimingSource::Frequencies {
                coupling: coupling.scaled(c),
                rotation: rotation.scaled(c),
                heisenberg: heisenberg.map(|h| h.scaled(c)),
                convention: *convention,
            },
            TimingSource::Direct { tau_iswap, tau_rot, tau_sqrtswap } => TimingSource::Direct {
                tau_iswap: tau_iswap / c,
                tau_rot: tau_rot / c,
                tau_sqrtswap: tau_sqrtswap.map(|t| t / c),
            },
        };
        p
    }
}

fn freq_preset(name: &str, description: &str, j: Quantity, rot: Quantity, conv: Convention, t2: f64) -> HardwarePreset {
    HardwarePreset {
        name: name.into(),
        description: description.into(),
        timing: TimingSource::Frequencies { coupling: j, rotation: rot, heisenberg: None, convention: conv },
        dephasing_time: Some(t2),
        measurement_time: None,
        discrepancy: None,
    }
}

/// The four device examples.
pub fn builtin_presets() -> Vec<HardwarePreset> {
    vec![
        HardwarePreset {
            name: "qd-cavity".into(),
            description: "Quantum-dot spins coupled through a cavity; gate times given directly".into(),
            timing: TimingSource::Direct { tau_iswap: 30e-12, tau_rot: 10e-12, tau_sqrtswap: None },
            dephasing_time: None,
            measurement_time: None,
            discrepancy: Some(Discrepancy {
                quantity: "tau_puri_biswap".into(),
                printed: 60e-12,
                note: "printed total is 60 ps; 4 tau_rot + tau_iswap gives 70 ps".into(),
            }),
        },
        freq_preset(
            "sc-charge",
            "Superconducting charge qubits coupled through a resonator",
            Quantity::new(20.0, Unit::MHzCyclic),
            Quantity::new(1.0, Unit::GHzCyclic),
            Convention::Angular,
            500e-9,
        ),
        freq_preset(
            "flux",
            "Flux qubits with tunable XY coupling",
            Quantity::new(25.0, Unit::MHzCyclic),
            Quantity::new(1.0, Unit::GHzCyclic),
            Convention::Angular,
            500e-9,
        ),
        freq_preset(
            "qd-charge",
            "Double-dot charge qubits, energies in meV",
            Quantity::new(0.1, Unit::MilliElectronVolt),
            Quantity::new(0.8, Unit::MilliElectronVolt),
            Convention::Cyclic,
            100e-9,
        ),
    ]
}

pub fn builtin_preset(name: &str) -> Result<HardwarePreset> {
    builtin_presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {name:?}")))
}

/// Looks for `<dir>/<name>.json` first, then the built-in table.
pub fn find_preset(name: &str, dir: Option<&Path>) -> Result<HardwarePreset> {
    if let Some(dir) = dir {
        let path = dir.join(format!("{name}.json"));
        if path.is_file() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            return HardwarePreset::from_json(&text);
        }
    }
    builtin_preset(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateTimes {
    pub tau_rot: f64,
    pub tau_iswap: f64,
    pub tau_sqrtswap: Option<f64>,
}

pub fn gate_times(p: &HardwarePreset) -> Result<GateTimes> {
    p.validate()?;
    Ok(match &p.timing {
        TimingSource::Frequencies { coupling, rotation, heisenberg, convention } => GateTimes {
            tau_rot: PI / (4.0 * convention.rate(rotation)),
            tau_iswap: PI / (4.0 * convention.rate(coupling)),
            tau_sqrtswap: heisenberg.map(|h| PI / (8.0 * convention.rate(&h))),
        },
        TimingSource::Direct { tau_iswap, tau_rot, tau_sqrtswap } => {
            GateTimes { tau_rot: *tau_rot, tau_iswap: *tau_iswap, tau_sqrtswap: *tau_sqrtswap }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub preset: String,
    pub convention: Option<Convention>,
    pub tau_rot: f64,
    pub tau_iswap: f64,
    pub tau_sqrtswap: Option<f64>,
    pub tau_cnot: f64,
    pub tau_cnot_h: Option<f64>,
    pub tau_puri_bcnot: f64,
    pub tau_puri_biswap: f64,
    pub delta_puri_adv: f64,
    pub tau_bell_cnot: f64,
    pub tau_bell_iswap: f64,
    pub delta_bell_iswap_adv: f64,
    pub tau_bell_cnot_h: Option<f64>,
    pub tau_bell_sqrtswap: Option<f64>,
    pub delta_bell_sqrtswap_adv: Option<f64>,
    pub dephasing_time: Option<f64>,
    pub discrepancy: Option<Discrepancy>,
}

pub fn protocol_times(p: &HardwarePreset) -> Result<TimingReport> {
    let g = gate_times(p)?;
    let (r, i) = (g.tau_rot, g.tau_iswap);
    let tau_puri_bcnot = 5.0 * r + 2.0 * i;
    let tau_puri_biswap = 4.0 * r + i;
    let tau_bell_cnot = 5.0 * r + 2.0 * i;
    let tau_bell_iswap = 2.0 * r + i;
    let tau_bell_cnot_h = g.tau_sqrtswap.map(|s| 4.0 * r + 2.0 * s);
    let tau_bell_sqrtswap = g.tau_sqrtswap.map(|s| 3.0 * r + s);
    Ok(TimingReport {
        preset: p.name.clone(),
        convention: p.convention(),
        tau_rot: r,
        tau_iswap: i,
        tau_sqrtswap: g.tau_sqrtswap,
        tau_cnot: 4.0 * r + 2.0 * i,
        tau_cnot_h: g.tau_sqrtswap.map(|s| 3.0 * r + 2.0 * s),
        tau_puri_bcnot,
        tau_puri_biswap,
        delta_puri_adv: tau_puri_bcnot - tau_puri_biswap,
        tau_bell_cnot,
        tau_bell_iswap,
        delta_bell_iswap_adv: tau_bell_cnot - tau_bell_iswap,
        tau_bell_cnot_h,
        tau_bell_sqrtswap,
        delta_bell_sqrtswap_adv: tau_bell_cnot_h.zip(tau_bell_sqrtswap).map(|(a, b)| a - b),
        dephasing_time: p.dephasing_time,
        discrepancy: p.discrepancy.clone(),
    })
}

fn fmt_time(t: f64) -> String {
    let (scale, unit) = if t >= 1e-6 {
        (1e6, "us")
    } else if t >= 1e-9 {
        (1e9, "ns")
    } else {
        (1e12, "ps")
    };
    format!("{:.4} {unit}", t * scale)
}

impl TimingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Side-by-side comparison of the CNOT-based and iSWAP-based totals.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let conv = self.convention.map(|c| c.name()).unwrap_or("direct times");
        let _ = writeln!(s, "preset {} ({conv})", self.preset);
        let _ = writeln!(s, "tau_rot    {}", fmt_time(self.tau_rot));
        let _ = writeln!(s, "tau_iswap  {}", fmt_time(self.tau_iswap));
        if let Some(t) = self.tau_sqrtswap {
            let _ = writeln!(s, "tau_sqrtswap {} (convention-dependent)", fmt_time(t));
        }
        let _ = writeln!(s, "{:<14} {:>14} {:>14} {:>14}", "process", "CNOT-based", "native", "advantage");
        let _ = writeln!(
            s,
            "{:<14} {:>14} {:>14} {:>14}",
            "purification",
            fmt_time(self.tau_puri_bcnot),
            fmt_time(self.tau_puri_biswap),
            fmt_time(self.delta_puri_adv)
        );
        let _ = writeln!(
            s,
            "{:<14} {:>14} {:>14} {:>14}",
            "bell (iSWAP)",
            fmt_time(self.tau_bell_cnot),
            fmt_time(self.tau_bell_iswap),
            fmt_time(self.delta_bell_iswap_adv)
        );
        if let (Some(a), Some(b), Some(d)) = (self.tau_bell_cnot_h, self.tau_bell_sqrtswap, self.delta_bell_sqrtswap_adv) {
            let _ = writeln!(s, "{:<14} {:>14} {:>14} {:>14}", "bell (sqrtSWAP)", fmt_time(a), fmt_time(b), fmt_time(d));
        }
        if let Some(t2) = self.dephasing_time {
            let _ = writeln!(s, "dephasing  {}", fmt_time(t2));
        }
        if let Some(d) = &self.discrepancy {
            let _ = writeln!(s, "DISCREPANCY {}: printed {}; {}", d.quantity, fmt_time(d.printed), d.note);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    Biswap,
    Bcnot,
}

/// `floor(T2 / (round + measurement))`.
pub fn rounds_for(dephasing_time: f64, round_time: f64, measurement_time: f64) -> Result<u64> {
    check_positive("round time", round_time)?;
    if !(dephasing_time >= 0.0 && measurement_time >= 0.0) {
        return invalid("times must be non-negative");
    }
    Ok((dephasing_time / (round_time + measurement_time)).floor() as u64)
}

pub fn rounds_within_coherence(p: &HardwarePreset, protocol: Protocol) -> Result<u64> {
    let meas = p.measurement_time.ok_or_else(|| Error::InvalidArgument(format!("preset {} has no measurement time", p.name)))?;
    let t2 = p.dephasing_time.ok_or_else(|| Error::InvalidArgument(format!("preset {} has no dephasing time", p.name)))?;
    let t = protocol_times(p)?;
    let round = match protocol {
        Protocol::Biswap => t.tau_puri_biswap,
        Protocol::Bcnot => t.tau_puri_bcnot,
    };
    rounds_for(t2, round, meas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        ((a - b) / b).abs() < rel
    }

    #[test]
    fn sc_charge_numbers() {
        let t = protocol_times(&builtin_preset("sc-charge").unwrap()).unwrap();
        assert!(close(t.tau_iswap, 6.25e-9, 1e-12));
        assert!(close(t.tau_rot, 125e-12, 1e-12));
        assert!(close(t.tau_puri_bcnot, 13.125e-9, 1e-12));
        assert!(close(t.tau_puri_biswap, 6.75e-9, 1e-12));
        assert!(t.tau_sqrtswap.is_none() && t.tau_bell_sqrtswap.is_none());
    }

    #[test]
    fn flux_numbers() {
        let t = protocol_times(&builtin_preset("flux").unwrap()).unwrap();
        assert!(close(t.tau_iswap, 5e-9, 1e-12));
        assert!(close(t.tau_puri_bcnot, 10.625e-9, 1e-12));
        assert!(close(t.tau_puri_biswap, 5.5e-9, 1e-12));
    }

    #[test]
    fn qd_charge_numbers() {
        let p = builtin_preset("qd-charge").unwrap();
        let g = gate_times(&p).unwrap();
        assert!(close(g.tau_iswap, 32.5e-12, 0.005));
        assert!(close(g.tau_rot, 4.06e-12, 0.005));
        let t = protocol_times(&p).unwrap();
        assert!(close(t.tau_puri_bcnot, 85.3e-12, 0.005));
        assert!(close(t.tau_puri_biswap, 48.7e-12, 0.005));
    }

    #[test]
    fn qd_cavity_flags_discrepancy() {
        let t = protocol_times(&builtin_preset("qd-cavity").unwrap()).unwrap();
        assert!(close(t.tau_puri_biswap, 70e-12, 1e-12));
        assert!(t.discrepancy.is_some());
        assert!(t.to_table().contains("DISCREPANCY"));
    }

    #[test]
    fn table_identities() {
        for p in builtin_presets() {
            let t = protocol_times(&p).unwrap();
            assert_eq!(t.delta_puri_adv, t.tau_puri_bcnot - t.tau_puri_biswap);
            assert_eq!(t.delta_bell_iswap_adv, t.tau_bell_cnot - t.tau_bell_iswap);
            assert!(close(t.delta_puri_adv, t.tau_rot + t.tau_iswap, 1e-12));
            assert!(close(t.delta_bell_iswap_adv, 3.0 * t.tau_rot + t.tau_iswap, 1e-12));
        }
    }

    #[test]
    fn sqrtswap_fields_with_heisenberg_coupling() {
        let mut p = builtin_preset("sc-charge").unwrap();
        if let TimingSource::Frequencies { heisenberg, .. } = &mut p.timing {
            *heisenberg = Some(Quantity::new(20.0, Unit::MHzCyclic));
        }
        let t = protocol_times(&p).unwrap();
        let s = t.tau_sqrtswap.unwrap();
        assert!(close(s, t.tau_iswap / 2.0, 1e-12));
        assert!(close(t.delta_bell_sqrtswap_adv.unwrap(), t.tau_rot + s, 1e-12));
    }

    #[test]
    fn units_agree() {
        let a = Quantity::new(20.0, Unit::MHzCyclic);
        let b = Quantity::new(2.0 * PI * 20e6, Unit::RadPerS);
        assert!(close(a.angular(), b.angular(), 1e-15));
        let e = Quantity::new(1.0, Unit::ElectronVolt);
        assert!(close(e.angular() / e.cyclic(), 2.0 * PI, 1e-9));
        assert!(close(Quantity::new(1000.0, Unit::MilliElectronVolt).cyclic(), e.cyclic(), 1e-15));
    }

    #[test]
    fn rounds_examples() {
        assert_eq!(rounds_for(500e-9, 6.75e-9, 0.0).unwrap(), 74);
        assert_eq!(rounds_for(500e-9, 6.75e-9, 1e-3).unwrap(), 0);
        assert_eq!(rounds_for(1e-9, 6.75e-9, 0.0).unwrap(), 0);
        let p = builtin_preset("sc-charge").unwrap();
        assert!(rounds_within_coherence(&p, Protocol::Biswap).is_err());
        let p = HardwarePreset { measurement_time: Some(0.0), ..p };
        assert_eq!(rounds_within_coherence(&p, Protocol::Biswap).unwrap(), 74);
        assert_eq!(rounds_within_coherence(&p, Protocol::Bcnot).unwrap(), 38);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = builtin_preset("flux").unwrap();
        if let TimingSource::Frequencies { coupling, .. } = &mut p.timing {
            coupling.value = -1.0;
        }
        assert!(gate_times(&p).is_err());
        assert!(builtin_preset("nope").is_err());
    }

    #[test]
    fn json_round_trip() {
        for p in builtin_presets() {
            let back = HardwarePreset::from_json(&p.to_json()).unwrap();
            assert_eq!(back, p);
        }
        assert!(HardwarePreset::from_json("{\"name\": 3}").is_err());
    }
}
