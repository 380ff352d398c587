//! Two qubits dispersively coupled through one cavity mode.
//!
//! `jc_effective` evaluates the second-order exchange coupling and dressed
//! frequencies. `jc_validate` checks it against brute-force evolution of the
//! full Hamiltonian on a truncated Fock space, written in the frame rotating
//! at the cavity frequency:
//!
//! `H = sum_i (omega_qi - omega) s+_i s-_i + chi_i (a^dag s-_i + a s+_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{ComplexMatrix, C64, ONE, ZERO};

/// Largest `|chi / Delta|` accepted.
pub const DISPERSIVE_LIMIT: f64 = 0.2;

const LEAKAGE_LIMIT: f64 = 1e-6;

/// Angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub omega: f64,
    pub omega_q1: f64,
    pub omega_q2: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub fock_cutoff: usize,
}

impl JcParams {
    /// Identical qubits at detuning `delta` below the cavity, `chi = ratio * delta`.
    pub fn symmetric(omega: f64, delta: f64, ratio: f64, fock_cutoff: usize) -> Self {
        JcParams {
            omega,
            omega_q1: omega - delta,
            omega_q2: omega - delta,
            chi1: ratio * delta,
            chi2: ratio * delta,
            fock_cutoff,
        }
    }

    pub fn detunings(&self) -> (f64, f64) {
        (self.omega - self.omega_q1, self.omega - self.omega_q2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcEffective {
    pub j_eff: f64,
    pub omega_q1_dressed: f64,
    pub omega_q2_dressed: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

pub fn jc_effective(p: &JcParams) -> Result<JcEffective> {
    let vals = [p.omega, p.omega_q1, p.omega_q2, p.chi1, p.chi2];
    if vals.iter().any(|v| !v.is_finite()) {
        return invalid("JC parameters must be finite");
    }
    let (d1, d2) = p.detunings();
    if d1 == 0.0 {
        return Err(Error::SingularDetuning(1));
    }
    if d2 == 0.0 {
        return Err(Error::SingularDetuning(2));
    }
    let (a1, a2) = (p.chi1 / d1, p.chi2 / d2);
    if a1.abs() > DISPERSIVE_LIMIT || a2.abs() > DISPERSIVE_LIMIT {
        return invalid(format!("|chi/Delta| = ({a1:.3}, {a2:.3}) exceeds the dispersive limit {DISPERSIVE_LIMIT}"));
    }
    Ok(JcEffective {
        j_eff: p.chi1 * p.chi2 * (d1 + d2) / (4.0 * d1 * d2),
        omega_q1_dressed: p.omega_q1 + p.chi1 * p.chi1 / d1,
        omega_q2_dressed: p.omega_q2 + p.chi2 * p.chi2 / d2,
        alpha1: a1,
        alpha2: a2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcValidation {
    /// Fitted `Omega` in `P_ge(t) ~ sin^2(Omega t)`, rad/s.
    pub measured_exchange_frequency: f64,
    /// `2 J_eff`.
    pub expected_exchange_frequency: f64,
    pub relative_error: f64,
    /// Largest population seen in the top Fock level.
    pub max_leakage: f64,
}

/// Basis index for (photons n, qubit 1 excited, qubit 2 excited).
fn idx(n: usize, e1: usize, e2: usize) -> usize {
    4 * n + 2 * e1 + e2
}

fn hamiltonian(p: &JcParams) -> ComplexMatrix {
    let levels = p.fock_cutoff + 1;
    let dim = 4 * levels;
    let mut h = ComplexMatrix::zeros(dim);
    for n in 0..levels {
        for e1 in 0..2 {
            for e2 in 0..2 {
                let i = idx(n, e1, e2);
                let diag = e1 as f64 * (p.omega_q1 - p.omega) + e2 as f64 * (p.omega_q2 - p.omega);
                h[(i, i)] = C64::new(diag, 0.0);
                if n + 1 < levels {
                    let amp = ((n + 1) as f64).sqrt();
                    // a^dag s- moves an excitation from a qubit into the cavity
                    if e1 == 1 {
                        let j = idx(n + 1, 0, e2);
                        h[(j, i)] += C64::new(p.chi1 * amp, 0.0);
                        h[(i, j)] += C64::new(p.chi1 * amp, 0.0);
                    }
                    if e2 == 1 {
                        let j = idx(n + 1, e1, 0);
                        h[(j, i)] += C64::new(p.chi2 * amp, 0.0);
                        h[(i, j)] += C64::new(p.chi2 * amp, 0.0);
                    }
                }
            }
        }
    }
    h
}

/// Least-squares fit of `c0 + c1 cos(2 w t) + c2 sin(2 w t)`; returns the
/// residual sum of squares.
fn sinusoid_residual(ts: &[f64], ys: &[f64], w: f64) -> f64 {
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (&t, &y) in ts.iter().zip(ys) {
        let row = [1.0, (2.0 * w * t).cos(), (2.0 * w * t).sin()];
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let Some(c) = solve3(ata, aty) else { return f64::INFINITY };
    ts.iter()
        .zip(ys)
        .map(|(&t, &y)| {
            let f = c[0] + c[1] * (2.0 * w * t).cos() + c[2] * (2.0 * w * t).sin();
            (y - f) * (y - f)
        })
        .sum()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..3 {
            let f = a[r][col] / a[col][col];
            for k in col..3 {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = ((r + 1)..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Coarse `Omega` from crossings of the mean with hysteresis, so the small
/// fast ripple does not add spurious crossings.
fn coarse_frequency(ts: &[f64], ys: &[f64]) -> Option<f64> {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let amp = ys.iter().map(|y| (y - mean).abs()).fold(0.0, f64::max);
    if amp < 1e-9 {
        return None;
    }
    let band = 0.25 * amp;
    let mut state = 0i8;
    let mut crossings = Vec::new();
    for (&t, &y) in ts.iter().zip(ys) {
        let s = if y > mean + band {
            1
        } else if y < mean - band {
            -1
        } else {
            continue;
        };
        if state != 0 && s != state {
            crossings.push(t);
        }
        state = s;
    }
    if crossings.len() < 2 {
        // less than a full oscillation: fall back to the window length
        return Some(std::f64::consts::PI / (2.0 * ts[ts.len() - 1]));
    }
    // successive crossings of cos(2 w t) are pi / (2 w) apart
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(std::f64::consts::PI * (crossings.len() - 1) as f64 / (2.0 * span))
}

fn fit_frequency(ts: &[f64], ys: &[f64]) -> f64 {
    let Some(w0) = coarse_frequency(ts, ys) else { return 0.0 };
    let (lo, hi) = (0.7 * w0, 1.3 * w0);
    let n = 300;
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let best = grid
        .iter()
        .map(|&w| (w, sinusoid_residual(ts, ys, w)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid not empty")
        .0;
    // golden-section refinement inside one grid cell either side
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = (best - step, best + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (sinusoid_residual(ts, ys, c), sinusoid_residual(ts, ys, d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sinusoid_residual(ts, ys, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sinusoid_residual(ts, ys, d);
        }
    }
    0.5 * (a + b)
}

/// Evolves `|e, g, 0 photons>` for `evolution_time` in `steps` equal steps and
/// fits the `|eg> -> |ge>` transfer to `sin^2(Omega t)`.
pub fn jc_validate(p: &JcParams, evolution_time: f64, steps: usize) -> Result<JcValidation> {
    let eff = jc_effective(p)?;
    if p.fock_cutoff < 2 {
        return invalid("Fock cutoff must be at least 2");
    }
    if !(evolution_time.is_finite() && evolution_time > 0.0) || steps < 16 {
        return invalid("need a positive evolution time and at least 16 steps");
    }
    let h = hamiltonian(p);
    let dt = evolution_time / steps as f64;
    let u = h.scale(C64::new(0.0, -dt)).expm();
    let dim = h.dim();
    let mut psi = vec![ZERO; dim];
    psi[idx(0, 1, 0)] = ONE;
    let top: Vec<usize> = (0..4).map(|k| 4 * p.fock_cutoff + k).collect();
    let mut ts = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    let mut leak: f64 = 0.0;
    for k in 0..=steps {
        if k > 0 {
            psi = u.apply(&psi)?;
        }
        ts.push(k as f64 * dt);
        ys.push(psi[idx(0, 0, 1)].norm_sqr());
        leak = leak.max(top.iter().map(|&i| psi[i].norm_sqr()).sum());
    }
    if leak > LEAKAGE_LIMIT {
        return Err(Error::CutoffTooSmall { leakage: leak });
    }
    let measured = fit_frequency(&ts, &ys);
    let expected = 2.0 * eff.j_eff;
    let relative_error = if expected == 0.0 { measured.abs() } else { ((measured - expected) / expected).abs() };
    Ok(JcValidation {
        measured_exchange_frequency: measured,
        expected_exchange_frequency: expected,
        relative_error,
        max_leakage: leak,
    })
}

/// A window of about four exchange periods, or `1000 / |Delta|` without exchange.
pub fn default_evolution_time(p: &JcParams) -> Result<f64> {
    let eff = jc_effective(p)?;
    if eff.j_eff == 0.0 {
        let (d1, d2) = p.detunings();
        return Ok(1000.0 / d1.abs().min(d2.abs()));
    }
    Ok(4.0 * std::f64::consts::PI / (2.0 * eff.j_eff.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const OMEGA: f64 = 2.0 * PI * 10e9;
    const DELTA: f64 = 2.0 * PI * 1e9;

    #[test]
    fn effective_examples() {
        let p = JcParams::symmetric(OMEGA, DELTA, 0.05, 5);
        let e = jc_effective(&p).unwrap();
        let chi = 0.05 * DELTA;
        assert!((e.j_eff - chi * chi / (2.0 * DELTA)).abs() < 1e-9 * e.j_eff);
        assert!((e.omega_q1_dressed - (OMEGA - DELTA + chi * chi / DELTA)).abs() < 1e-3);

        let p = JcParams { omega_q2: OMEGA + DELTA, chi2: -0.05 * DELTA, ..p };
        assert_eq!(jc_effective(&p).unwrap().j_eff, 0.0);

        let g = 2.0 * PI * 200e6;
        let p = JcParams::symmetric(OMEGA, 2.0 * PI * 2e9, g / (2.0 * PI * 2e9), 5);
        let j = jc_effective(&p).unwrap().j_eff / (2.0 * PI);
        assert!((j - 10e6).abs() < 1e-3);
    }

    #[test]
    fn effective_guards() {
        let p = JcParams { omega_q1: OMEGA, ..JcParams::symmetric(OMEGA, DELTA, 0.05, 5) };
        assert!(matches!(jc_effective(&p), Err(Error::SingularDetuning(1))));
        assert!(jc_effective(&JcParams::symmetric(OMEGA, DELTA, 0.3, 5)).is_err());
    }

    #[test]
    fn effective_is_symmetric() {
        let p = JcParams { omega: OMEGA, omega_q1: OMEGA - DELTA, omega_q2: OMEGA - 1.3 * DELTA, chi1: 0.04 * DELTA, chi2: 0.07 * DELTA, fock_cutoff: 3 };
        let q = JcParams { omega_q1: p.omega_q2, omega_q2: p.omega_q1, chi1: p.chi2, chi2: p.chi1, ..p };
        let (a, b) = (jc_effective(&p).unwrap(), jc_effective(&q).unwrap());
        assert!((a.j_eff - b.j_eff).abs() < 1e-9 * a.j_eff);
        assert_eq!(a.omega_q1_dressed, b.omega_q2_dressed);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = hamiltonian(&JcParams::symmetric(OMEGA, DELTA, 0.1, 3));
        assert!(h.is_hermitian(1e-15));
        assert_eq!(h.dim(), 16);
    }

    #[test]
    fn fit_recovers_clean_sinusoid() {
        let w = 3.7;
        let ts: Vec<f64> = (0..2000).map(|k| k as f64 * 0.002).collect();
        let ys: Vec<f64> = ts.iter().map(|t| (w * t).sin().powi(2)).collect();
        assert!((fit_frequency(&ts, &ys) - w).abs() < 1e-9);
    }

    #[test]
    fn validation_at_five_percent() {
        let p = JcParams::symmetric(OMEGA, DELTA, 0.05, 5);
        let v = jc_validate(&p, default_evolution_time(&p).unwrap(), 4000).unwrap();
        assert!(v.relative_error < 0.02, "{v:?}");
        assert!(v.max_leakage < 1e-6);
    }

    #[test]
    fn error_grows_with_coupling() {
        let errs: Vec<f64> = [0.02, 0.05, 0.10]
            .iter()
            .map(|&r| {
                let p = JcParams::symmetric(OMEGA, DELTA, r, 5);
                jc_validate(&p, default_evolution_time(&p).unwrap(), 4000).unwrap().relative_error
            })
            .collect();
        assert!(errs[0] < errs[1] && errs[1] < errs[2], "{errs:?}");
    }

    #[test]
    fn no_coupling_no_exchange() {
        let p = JcParams::symmetric(OMEGA, DELTA, 0.0, 3);
        let v = jc_validate(&p, default_evolution_time(&p).unwrap(), 500).unwrap();
        assert_eq!(v.measured_exchange_frequency, 0.0);
    }
}
