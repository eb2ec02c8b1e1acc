//! Lab-frame check of the rotating-wave pump model.
//!
//! Integrates `phi'' + phi'/Q + sin(phi) = i_p cos(Omega tau)` from rest,
//! extracts the fundamental of `phi` and converts it to a photon number
//! `n = (phi_a / 4)^2` for comparison with the steady-state solver.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DerivedParams;
use crate::error::{JpaError, Result};
use crate::nonlinearity::Order;
use crate::rk4;
use crate::steady_state::{solve_photon_number, PumpDrive};

/// Drive current `I_p / I_c` that corresponds to the normalized pump `r`.
pub fn pump_current_from_r(r: f64, q: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(JpaError::domain(format!(
            "r must be finite and >= 0, got {r}"
        )));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(JpaError::domain(format!(
            "Q must be finite and > 0, got {q}"
        )));
    }
    Ok(8.0 * r / (3f64.powf(0.75) * q.powf(1.5)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub phi: f64,
    pub dphi: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Defaults to `2 pi / (200 max(Omega, 1))`, trimmed to divide the drive period.
    pub dt: Option<f64>,
    /// Defaults to `60 Q`.
    pub settle: Option<f64>,
    pub window_periods: usize,
    /// Subharmonic and per-period drift thresholds, relative to `phi_a`.
    pub flag_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dt: None,
            settle: None,
            window_periods: 64,
            flag_tol: 1e-3,
        }
    }
}

/// Steady-state response of the phase equation at one drive frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseResponse {
    /// Amplitude of the fundamental at `Omega`.
    pub phi_a: f64,
    /// Phase of the fundamental: `phi ~ phi_a cos(Omega tau + phase)`.
    pub phase: f64,
    /// Amplitude of the component at `Omega / 2`.
    pub subharmonic: f64,
    /// Largest relative change of the fundamental between consecutive periods.
    pub drift: f64,
    pub period_doubling: bool,
    pub non_periodic: bool,
}

impl PhaseResponse {
    pub fn flagged(&self) -> bool {
        self.period_doubling || self.non_periodic
    }

    pub fn flags(&self) -> &'static str {
        match (self.period_doubling, self.non_periodic) {
            (false, false) => "",
            (true, false) => "period-doubling",
            (false, true) => "non-periodic",
            (true, true) => "period-doubling;non-periodic",
        }
    }
}

fn phase_rhs(q: f64, i_p: f64, omega: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |tau, y| [y[1], -y[1] / q - y[0].sin() + i_p * (omega * tau).cos()]
}

/// Free or driven phase trajectory from `y0`, `steps` steps of `dt`.
pub fn phase_trajectory(
    i_p: f64,
    omega_rel: f64,
    q: f64,
    y0: [f64; 2],
    dt: f64,
    steps: usize,
) -> Result<Vec<PhaseState>> {
    let f = phase_rhs(q, i_p, omega_rel);
    let mut y = y0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(PhaseState {
        phi: y[0],
        dphi: y[1],
        tau: 0.0,
    });
    for k in 0..steps {
        let tau = k as f64 * dt;
        y = rk4::step(&f, tau, &y, dt);
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(JpaError::Divergence { tau: tau + dt });
        }
        out.push(PhaseState {
            phi: y[0],
            dphi: y[1],
            tau: tau + dt,
        });
    }
    Ok(out)
}

pub fn integrate_phase_eq(
    i_p: f64,
    omega_rel: f64,
    q: f64,
    config: &OracleConfig,
) -> Result<PhaseResponse> {
    if !(i_p.is_finite() && i_p >= 0.0) {
        return Err(JpaError::domain(format!(
            "i_p must be finite and >= 0, got {i_p}"
        )));
    }
    if !(omega_rel.is_finite() && omega_rel > 0.0) {
        return Err(JpaError::domain(format!(
            "omega_rel must be > 0, got {omega_rel}"
        )));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(JpaError::domain(format!("Q must be > 0, got {q}")));
    }
    if config.window_periods < 2 || !config.window_periods.is_multiple_of(2) {
        return Err(JpaError::Window(format!(
            "window must span an even number (>= 2) of drive periods, got {}",
            config.window_periods
        )));
    }
    let period = 2.0 * PI / omega_rel;
    let dt0 = config.dt.unwrap_or(2.0 * PI / (200.0 * omega_rel.max(1.0)));
    if !(dt0.is_finite() && dt0 > 0.0) {
        return Err(JpaError::validation("dt", "must be > 0"));
    }
    let per_period = (period / dt0).ceil() as usize;
    let dt = period / per_period as f64;
    let settle_periods = (config.settle.unwrap_or(60.0 * q) / period).ceil() as usize;

    let f = phase_rhs(q, i_p, omega_rel);
    let mut y = [0.0, 0.0];
    let mut k = 0usize;
    let advance = |y: &mut [f64; 2], k: &mut usize| -> Result<f64> {
        let tau = *k as f64 * dt;
        *y = rk4::step(&f, tau, y, dt);
        *k += 1;
        if y[0].is_finite() && y[1].is_finite() {
            Ok(y[0])
        } else {
            Err(JpaError::Divergence { tau: tau + dt })
        }
    };
    for _ in 0..settle_periods * per_period {
        advance(&mut y, &mut k)?;
    }

    // samples phi(tau_k) with tau_k on whole-period boundaries
    let mut fundamental = Complex64::new(0.0, 0.0);
    let mut sub = Complex64::new(0.0, 0.0);
    let mut per_period_amp = Vec::with_capacity(config.window_periods);
    for _ in 0..config.window_periods {
        let mut c = Complex64::new(0.0, 0.0);
        for _ in 0..per_period {
            let tau = k as f64 * dt;
            let phi = y[0];
            let e = Complex64::from_polar(1.0, -omega_rel * tau);
            c += phi * e;
            sub += phi * Complex64::from_polar(1.0, -0.5 * omega_rel * tau);
            advance(&mut y, &mut k)?;
        }
        fundamental += c;
        per_period_amp.push(2.0 * c.norm() / per_period as f64);
    }
    let samples = (config.window_periods * per_period) as f64;
    let fundamental = 2.0 * fundamental / samples;
    let phi_a = fundamental.norm();
    let subharmonic = 2.0 * sub.norm() / samples;
    let drift = per_period_amp
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
        / phi_a.max(f64::MIN_POSITIVE);
    let tiny = phi_a == 0.0;
    Ok(PhaseResponse {
        phi_a,
        phase: fundamental.arg(),
        subharmonic,
        drift: if tiny { 0.0 } else { drift },
        period_doubling: !tiny && subharmonic > config.flag_tol * phi_a,
        non_periodic: !tiny && drift > config.flag_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OraclePoint {
    pub omega_rel: f64,
    pub phi_a: f64,
    /// `(phi_a / 4)^2`
    pub n_cl: f64,
    /// Root of the rotating-wave response closest to `n_cl`.
    pub n_rwa: f64,
    pub rel_dev: f64,
    pub flags: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub r: f64,
    pub q: f64,
    pub i_p: f64,
    pub points: Vec<OraclePoint>,
    pub max_rel_dev: f64,
    /// Drive frequency of the largest deviation.
    pub worst_omega: f64,
    pub flagged: usize,
}

/// Lab-frame resonance curve against the `N = inf` steady state.
pub fn compare_resonance_curves(
    params: &DerivedParams,
    r: f64,
    omega_grid: &[f64],
    config: &OracleConfig,
) -> Result<OracleReport> {
    if omega_grid.is_empty() {
        return Err(JpaError::validation("omega_grid", "empty"));
    }
    let q = params.q;
    let i_p = pump_current_from_r(r, q)?;
    let points: Vec<OraclePoint> = omega_grid
        .par_iter()
        .map(|&w| -> Result<OraclePoint> {
            let at = |e: JpaError| e.at_cell(w, r);
            let drive = PumpDrive::new(r, w, Order::Infinite).map_err(at)?;
            let roots = solve_photon_number(params, &drive).map_err(at)?;
            let resp = integrate_phase_eq(i_p, w, q, config).map_err(at)?;
            let n_cl = (resp.phi_a / 4.0).powi(2);
            let n_rwa = roots
                .iter()
                .map(|s| s.n)
                .min_by(|a, b| (a - n_cl).abs().total_cmp(&(b - n_cl).abs()))
                .unwrap_or(0.0);
            let rel_dev = if n_rwa == 0.0 && n_cl == 0.0 {
                0.0
            } else {
                (n_cl - n_rwa).abs() / n_rwa.abs().max(f64::MIN_POSITIVE)
            };
            Ok(OraclePoint {
                omega_rel: w,
                phi_a: resp.phi_a,
                n_cl,
                n_rwa,
                rel_dev,
                flags: resp.flags(),
            })
        })
        .collect::<Result<_>>()?;
    let (worst_omega, max_rel_dev) = points
        .iter()
        .map(|p| (p.omega_rel, p.rel_dev))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((f64::NAN, 0.0));
    let flagged = points.iter().filter(|p| !p.flags.is_empty()).count();
    Ok(OracleReport {
        r,
        q,
        i_p,
        points,
        max_rel_dev,
        worst_omega,
        flagged,
    })
}
