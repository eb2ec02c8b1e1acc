//! Semi-classical signal dynamics beyond the stiff-pump linear response.
//!
//! The signal `u` and its partner `v` (the `a^dagger` variable) are evolved
//! as independent complex envelopes in the pump frame. Only `u` is driven
//! unless the conjugate configuration is requested, in which case `v = u*`
//! is an exact invariant.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DerivedParams;
use crate::error::{JpaError, Result};
use crate::linear::{gain, linear_coefficients, LinearCoefficients};
use crate::nonlinearity::{complex_ratio, cubic_weight, quadratic_weight};
use crate::rk4;
use crate::special::MAX_SCALED_ARGUMENT;
use crate::steady_state::{solve_default_branch, PumpDrive, SteadyState};

/// Envelope magnitude treated as a blow-up.
const DIVERGENCE_LIMIT: f64 = 1e6;
/// Transient e-foldings of the slowest linear mode allowed to decay before
/// measuring.
const SETTLE_EFOLDINGS: f64 = 12.0;

/// Quadratic and cubic signal coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoefficients {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
}

pub fn cubic_coefficients(
    params: &DerivedParams,
    drive: &PumpDrive,
    ss: &SteadyState,
) -> Result<CubicCoefficients> {
    let k = params.kerr_ratio;
    let p = quadratic_weight(ss.n, drive.order)?;
    let z = cubic_weight(ss.n, drive.order)?;
    let mi = -Complex64::i();
    Ok(CubicCoefficients {
        c1: mi * k * ss.alpha.conj() * p,
        c2: mi * k * ss.alpha * p,
        c3: mi * k * z / 3.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeModel {
    /// Linear terms plus all quadratic and cubic terms.
    Cubic,
    /// Cubic model with `c1 = c2 = 0`.
    CubicC3Only,
    /// Closed-form sine nonlinearity.
    FullSine,
    /// Stiff-pump linear terms only.
    Linear,
}

impl EnvelopeModel {
    pub const ALL: [EnvelopeModel; 4] = [
        EnvelopeModel::Cubic,
        EnvelopeModel::CubicC3Only,
        EnvelopeModel::FullSine,
        EnvelopeModel::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvelopeModel::Cubic => "cubic",
            EnvelopeModel::CubicC3Only => "cubic-c3-only",
            EnvelopeModel::FullSine => "full-sine",
            EnvelopeModel::Linear => "linear",
        }
    }
}

impl fmt::Display for EnvelopeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvelopeModel {
    type Err = JpaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        EnvelopeModel::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .or(match key.as_str() {
                "c3-only" | "cubic-c3" => Some(EnvelopeModel::CubicC3Only),
                "sine" => Some(EnvelopeModel::FullSine),
                _ => None,
            })
            .ok_or_else(|| {
                JpaError::validation(
                    "model",
                    format!(
                        "unknown model {s:?}; expected cubic, cubic-c3-only, full-sine or linear"
                    ),
                )
            })
    }
}

/// Drive applied to the `v` equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdlerDrive {
    /// No independent drive: phase-insensitive gain.
    #[default]
    Zero,
    /// Complex conjugate of the `u` drive; keeps `v = u*`.
    Conjugate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeState {
    pub u: Complex64,
    pub v: Complex64,
    pub tau: f64,
}

/// Simulation settings. `None` fields take the defaults of [`SimConfig::resolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: Option<f64>,
    pub settle: Option<f64>,
    pub window: Option<f64>,
    /// Relative difference allowed between the tones of the two window halves.
    pub stationarity_tol: f64,
    /// Extra settle blocks tried before declaring a run non-stationary.
    pub max_extensions: usize,
    /// Rerun at half step and require agreement within `certificate_db`.
    pub step_halving: bool,
    pub certificate_db: f64,
    pub idler_drive: IdlerDrive,
    /// Full-sine model only: hold the nonlinearity argument at the pump value.
    pub freeze_m: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: None,
            settle: None,
            window: None,
            stationarity_tol: 1e-3,
            max_extensions: 4,
            step_halving: true,
            certificate_db: 0.01,
            idler_drive: IdlerDrive::Zero,
            freeze_m: false,
        }
    }
}

/// Concrete step and step counts for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub dt: f64,
    pub settle_steps: usize,
    /// Even, so that the window splits into two equal halves; for `delta != 0`
    /// each half spans whole periods.
    pub window_steps: usize,
}

impl Timing {
    pub fn halved(&self) -> Timing {
        Timing {
            dt: self.dt / 2.0,
            settle_steps: 2 * self.settle_steps,
            window_steps: 2 * self.window_steps,
        }
    }
}

/// Decay rate of the slowest mode of the linearized `(u, v)` system.
pub fn slowest_rate(co: &LinearCoefficients) -> f64 {
    let disc = co.l2.norm_sqr() - co.l1.im * co.l1.im;
    -co.l1.re - disc.max(0.0).sqrt()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: Option<f64>| v.is_none_or(|x| x.is_finite() && x > 0.0);
        if !pos(self.dt) {
            return Err(JpaError::validation("dt", "must be > 0"));
        }
        if !pos(self.window) {
            return Err(JpaError::validation("window", "must be > 0"));
        }
        if !self.settle.is_none_or(|x| x.is_finite() && x >= 0.0) {
            return Err(JpaError::validation("settle", "must be >= 0"));
        }
        if !(self.stationarity_tol.is_finite() && self.stationarity_tol > 0.0) {
            return Err(JpaError::validation("stationarity_tol", "must be > 0"));
        }
        if !(self.certificate_db.is_finite() && self.certificate_db > 0.0) {
            return Err(JpaError::validation("certificate_db", "must be > 0"));
        }
        Ok(())
    }

    /// Step `min(0.25, 2 pi / (40 max(|delta|, 1/Q)))` trimmed to divide the
    /// signal period; settle `max(40 Q, 12 / slowest rate)`; window
    /// `max(20 periods, 20 Q)` rounded up to an even number of periods.
    pub fn resolve(&self, q: f64, delta: f64, co: &LinearCoefficients) -> Result<Timing> {
        self.validate()?;
        if !delta.is_finite() {
            return Err(JpaError::validation("delta", "must be finite"));
        }
        let dt0 = self
            .dt
            .unwrap_or_else(|| 0.25f64.min(2.0 * PI / (40.0 * delta.abs().max(1.0 / q))));
        let settle = self.settle.unwrap_or_else(|| {
            let rate = slowest_rate(co);
            let adaptive = if rate > 0.0 {
                SETTLE_EFOLDINGS / rate
            } else {
                0.0
            };
            (40.0 * q).max(adaptive)
        });
        let (dt, window_steps) = if delta == 0.0 {
            let window = self.window.unwrap_or(20.0 * q);
            let steps = (window / dt0).ceil() as usize;
            (dt0, steps + steps % 2)
        } else {
            let period = 2.0 * PI / delta.abs();
            let per_period = (period / dt0).ceil() as usize;
            let dt = period / per_period as f64;
            let window = self.window.unwrap_or((20.0 * period).max(20.0 * q));
            let periods = ((window / period) - 1e-9).ceil().max(1.0) as usize;
            let periods = periods + periods % 2;
            (dt, periods * per_period)
        };
        if window_steps < 2 {
            return Err(JpaError::Window("window shorter than two steps".into()));
        }
        Ok(Timing {
            dt,
            settle_steps: (settle / dt).ceil() as usize,
            window_steps,
        })
    }
}

/// Everything the right-hand side needs, fixed for one run.
#[derive(Debug, Clone, Copy)]
struct Envelope {
    model: EnvelopeModel,
    q: f64,
    omega: f64,
    kerr: f64,
    n: f64,
    alpha: Complex64,
    lin: LinearCoefficients,
    cub: CubicCoefficients,
    r_n: Complex64,
    order: crate::nonlinearity::Order,
    drive: f64,
    delta: f64,
    idler: IdlerDrive,
    freeze_m: bool,
}

impl Envelope {
    fn new(
        model: EnvelopeModel,
        params: &DerivedParams,
        drive: &PumpDrive,
        ss: &SteadyState,
        a_in_mag: f64,
        delta: f64,
        sim: &SimConfig,
    ) -> Result<Self> {
        if !(a_in_mag.is_finite() && a_in_mag >= 0.0) {
            return Err(JpaError::validation(
                "a_in",
                format!("must be finite and >= 0, got {a_in_mag}"),
            ));
        }
        let mut cub = cubic_coefficients(params, drive, ss)?;
        if model == EnvelopeModel::CubicC3Only {
            cub.c1 = Complex64::new(0.0, 0.0);
            cub.c2 = Complex64::new(0.0, 0.0);
        }
        Ok(Envelope {
            model,
            q: params.q,
            omega: drive.omega_rel,
            kerr: params.kerr_ratio,
            n: ss.n,
            alpha: ss.alpha,
            lin: linear_coefficients(params, drive, ss)?,
            cub,
            r_n: complex_ratio(Complex64::new(ss.n, 0.0), drive.order)?,
            order: drive.order,
            drive: a_in_mag,
            delta,
            idler: sim.idler_drive,
            freeze_m: sim.freeze_m,
        })
    }

    /// Input field `a_in(tau)` in units of `sqrt(omega0)`.
    fn input(&self, tau: f64) -> Complex64 {
        Complex64::from_polar(self.drive, -self.delta * tau)
    }

    fn rhs(&self, tau: f64, y: &[Complex64; 2]) -> [Complex64; 2] {
        let [u, v] = *y;
        let f = self.input(tau) / self.q.sqrt();
        let fv = match self.idler {
            IdlerDrive::Zero => Complex64::new(0.0, 0.0),
            IdlerDrive::Conjugate => f.conj(),
        };
        let LinearCoefficients { l1, l2 } = self.lin;
        match self.model {
            EnvelopeModel::Linear => [l1 * u + l2 * v + f, l1.conj() * v + l2.conj() * u + fv],
            EnvelopeModel::Cubic | EnvelopeModel::CubicC3Only => {
                let CubicCoefficients { c1, c2, c3 } = self.cub;
                let du = l1 * u + l2 * v + c1 * u * u + 2.0 * c2 * u * v + 3.0 * c3 * u * u * v + f;
                let dv = l1.conj() * v
                    + l2.conj() * u
                    + c1.conj() * v * v
                    + 2.0 * c2.conj() * u * v
                    + 3.0 * c3.conj() * v * v * u
                    + fv;
                [du, dv]
            }
            EnvelopeModel::FullSine => {
                let (r_m, diff) = if self.freeze_m {
                    (self.r_n, Complex64::new(0.0, 0.0))
                } else {
                    let m = self.n - self.kerr * (self.alpha.conj() * u + self.alpha * v + u * v);
                    if !(m.norm() <= MAX_SCALED_ARGUMENT) {
                        let nan = Complex64::new(f64::NAN, f64::NAN);
                        return [nan, nan];
                    }
                    let r_m =
                        complex_ratio(m, self.order).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                    (r_m, self.r_n - r_m)
                };
                let i = Complex64::i();
                let damping = 1.0 / (2.0 * self.q);
                let shift = 0.5 - self.omega + r_m;
                let du = -(damping + i * shift) * u + i * diff * self.alpha + f;
                let dv = -(damping - i * shift) * v - i * diff * self.alpha.conj() + fv;
                [du, dv]
            }
        }
    }

    fn step(&self, tau: f64, y: &[Complex64; 2], dt: f64) -> Result<[Complex64; 2]> {
        let next = rk4::step(|t, s| self.rhs(t, s), tau, y, dt);
        if next.iter().all(|z| z.norm() < DIVERGENCE_LIMIT) {
            Ok(next)
        } else {
            Err(JpaError::Divergence { tau: tau + dt })
        }
    }

    /// `u_out = u / sqrt(Q) - a_in`.
    fn output(&self, tau: f64, u: Complex64) -> Complex64 {
        u / self.q.sqrt() - self.input(tau)
    }
}

/// Integrates from `u = v = 0` over `settle_steps + window_steps` steps and
/// returns every state including the initial one.
#[allow(clippy::too_many_arguments)]
pub fn integrate_envelope(
    model: EnvelopeModel,
    params: &DerivedParams,
    drive: &PumpDrive,
    ss: &SteadyState,
    a_in_mag: f64,
    delta: f64,
    sim: &SimConfig,
    timing: &Timing,
) -> Result<Vec<EnvelopeState>> {
    let env = Envelope::new(model, params, drive, ss, a_in_mag, delta, sim)?;
    let total = timing.settle_steps + timing.window_steps;
    let mut out = Vec::with_capacity(total + 1);
    let mut y = [Complex64::new(0.0, 0.0); 2];
    out.push(EnvelopeState {
        u: y[0],
        v: y[1],
        tau: 0.0,
    });
    for k in 0..total {
        let tau = k as f64 * timing.dt;
        y = env.step(tau, &y, timing.dt)?;
        out.push(EnvelopeState {
            u: y[0],
            v: y[1],
            tau: (k + 1) as f64 * timing.dt,
        });
    }
    Ok(out)
}

/// `(1/T) sum u_out(tau) e^{i delta tau} dtau` over equally spaced samples
/// covering whole periods (rectangle rule, exact for sampled harmonics).
pub fn extract_tone(samples: &[(f64, Complex64)], delta: f64) -> Result<Complex64> {
    if samples.len() < 2 {
        return Err(JpaError::Window("need at least two samples".into()));
    }
    if delta != 0.0 {
        let dt = samples[1].0 - samples[0].0;
        let span = dt * samples.len() as f64;
        let period = 2.0 * PI / delta.abs();
        if span < period * (1.0 - 1e-9) {
            return Err(JpaError::Window(format!(
                "window {span} shorter than one signal period {period}"
            )));
        }
    }
    let sum: Complex64 = samples
        .iter()
        .map(|&(tau, z)| z * Complex64::from_polar(1.0, delta * tau))
        .sum();
    Ok(sum / samples.len() as f64)
}

/// Result of one settled run.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Measurement {
    tone: Complex64,
    stationary: bool,
    extensions: usize,
}

fn measure(env: &Envelope, timing: &Timing, sim: &SimConfig) -> Result<Measurement> {
    let dt = timing.dt;
    let mut y = [Complex64::new(0.0, 0.0); 2];
    let mut k = 0usize;
    let advance = |y: &mut [Complex64; 2], k: &mut usize, steps: usize| -> Result<()> {
        for _ in 0..steps {
            *y = env.step(*k as f64 * dt, y, dt)?;
            *k += 1;
        }
        Ok(())
    };
    advance(&mut y, &mut k, timing.settle_steps)?;
    let half = timing.window_steps / 2;
    let mut extensions = 0;
    loop {
        let mut samples = Vec::with_capacity(timing.window_steps);
        for _ in 0..timing.window_steps {
            let tau = k as f64 * dt;
            samples.push((tau, env.output(tau, y[0])));
            y = env.step(tau, &y, dt)?;
            k += 1;
        }
        let tone = extract_tone(&samples, env.delta)?;
        let first = extract_tone(&samples[..half], env.delta)?;
        let second = extract_tone(&samples[half..], env.delta)?;
        let scale = tone.norm().max(f64::MIN_POSITIVE);
        let stationary = (first - second).norm() / scale < sim.stationarity_tol;
        if stationary || extensions >= sim.max_extensions {
            return Ok(Measurement {
                tone,
                stationary,
                extensions,
            });
        }
        extensions += 1;
        advance(&mut y, &mut k, timing.settle_steps.max(timing.window_steps))?;
    }
}

/// One point of a saturation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationPoint {
    /// Input amplitude, units of `sqrt(omega0)`.
    pub a_in_mag: f64,
    /// Input photon flux, photons/s.
    pub a_in_flux: f64,
    pub delta: f64,
    pub omega_rel: f64,
    pub g_db: f64,
    /// Stationary and step-halving certified.
    pub converged: bool,
    pub stationary: bool,
    pub certified: bool,
    pub step_used: f64,
}

/// Large-signal gain `20 log10(|tone| / a_in)` from a settled run.
#[allow(clippy::too_many_arguments)]
pub fn gain_at_amplitude(
    model: EnvelopeModel,
    params: &DerivedParams,
    drive: &PumpDrive,
    ss: &SteadyState,
    a_in_mag: f64,
    delta: f64,
    sim: &SimConfig,
) -> Result<SaturationPoint> {
    if !(a_in_mag.is_finite() && a_in_mag > 0.0) {
        return Err(JpaError::validation(
            "a_in",
            format!("must be > 0, got {a_in_mag}"),
        ));
    }
    let env = Envelope::new(model, params, drive, ss, a_in_mag, delta, sim)?;
    let mut timing = sim.resolve(params.q, delta, &env.lin)?;
    let to_db = |m: &Measurement| 20.0 * (m.tone.norm() / a_in_mag).log10();
    let mut coarse = measure(&env, &timing, sim)?;
    let mut certified = !sim.step_halving;
    if sim.step_halving {
        for _ in 0..3 {
            let finer_timing = timing.halved();
            let finer = measure(&env, &finer_timing, sim)?;
            let agree = (to_db(&finer) - to_db(&coarse)).abs() < sim.certificate_db;
            coarse = finer;
            timing = finer_timing;
            if agree {
                certified = true;
                break;
            }
        }
    }
    Ok(SaturationPoint {
        a_in_mag,
        a_in_flux: params.photon_flux(a_in_mag),
        delta,
        omega_rel: drive.omega_rel,
        g_db: to_db(&coarse),
        converged: coarse.stationary && certified,
        stationary: coarse.stationary,
        certified,
        step_used: timing.dt,
    })
}

/// Pump frequency protocol along a saturation curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaProtocol {
    /// Keep `drive.omega_rel` for every amplitude.
    Fixed,
    /// Take the best gain over this pump-frequency grid at each amplitude.
    Remaximize(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationCurve {
    pub model: EnvelopeModel,
    pub r: f64,
    pub omega_rel: f64,
    pub delta: f64,
    /// Gain at the smallest amplitude.
    pub g0_db: f64,
    /// Stiff-pump linear gain at the same operating point.
    pub linear_db: f64,
    /// Pump input amplitude, units of `sqrt(omega0)`.
    pub pump_input: f64,
    /// Pump input photon flux, photons/s.
    pub pump_flux: f64,
    pub points: Vec<SaturationPoint>,
    /// Input amplitude at which the gain is 1 dB below `g0_db`.
    pub p1db: Option<f64>,
    /// Input amplitude at which `|alpha_in|^2 / |a_out|^2 = 100`.
    pub stiff_pump_marker: Option<f64>,
}

fn point_at(
    model: EnvelopeModel,
    params: &DerivedParams,
    drive: &PumpDrive,
    a: f64,
    delta: f64,
    sim: &SimConfig,
    protocol: &OmegaProtocol,
) -> Result<SaturationPoint> {
    match protocol {
        OmegaProtocol::Fixed => {
            let ss = solve_default_branch(params, drive)?;
            gain_at_amplitude(model, params, drive, &ss, a, delta, sim)
        }
        OmegaProtocol::Remaximize(grid) => {
            let mut best: Option<SaturationPoint> = None;
            for &w in grid {
                let d = drive.with_omega(w);
                let ss = solve_default_branch(params, &d)?;
                let p = gain_at_amplitude(model, params, &d, &ss, a, delta, sim)?;
                if best.is_none_or(|b| p.g_db > b.g_db) {
                    best = Some(p);
                }
            }
            best.ok_or_else(|| JpaError::validation("omega_grid", "empty"))
        }
    }
}

/// Gain versus input amplitude, with compression metadata.
pub fn saturation_curve(
    model: EnvelopeModel,
    params: &DerivedParams,
    drive: &PumpDrive,
    amplitudes: &[f64],
    delta: f64,
    sim: &SimConfig,
    protocol: &OmegaProtocol,
) -> Result<SaturationCurve> {
    if amplitudes.is_empty() {
        return Err(JpaError::validation("amplitudes", "empty"));
    }
    if amplitudes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(JpaError::validation("amplitudes", "must be finite and > 0"));
    }
    if amplitudes.windows(2).any(|p| p[1] <= p[0]) {
        return Err(JpaError::validation(
            "amplitudes",
            "must be strictly increasing",
        ));
    }
    if let OmegaProtocol::Remaximize(grid) = protocol {
        if grid.is_empty() {
            return Err(JpaError::validation("omega_grid", "empty"));
        }
    }
    let points: Vec<SaturationPoint> = amplitudes
        .par_iter()
        .map(|&a| {
            point_at(model, params, drive, a, delta, sim, protocol)
                .map_err(|e| e.at_cell(drive.omega_rel, drive.r))
        })
        .collect::<Result<_>>()?;

    let ss = solve_default_branch(params, drive)?;
    let linear_db = gain(&linear_coefficients(params, drive, &ss)?, params.q, delta)?.gain_db;
    let g0_db = points[0].g_db;
    let target = g0_db - 1.0;

    let p1db = match points.iter().position(|p| p.g_db <= target) {
        Some(0) | None => None,
        Some(i) => {
            let (mut lo, mut hi) = (points[i - 1].a_in_mag, points[i].a_in_mag);
            for _ in 0..40 {
                if hi / lo < 1.0 + 1e-4 {
                    break;
                }
                let mid = (lo * hi).sqrt();
                let g = point_at(model, params, drive, mid, delta, sim, protocol)?.g_db;
                if (g - target).abs() < 1e-3 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if g > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some((lo * hi).sqrt())
        }
    };

    let pump_input = params.pump_input(drive.r);
    Ok(SaturationCurve {
        model,
        r: drive.r,
        omega_rel: drive.omega_rel,
        delta,
        g0_db,
        linear_db,
        pump_input,
        pump_flux: params.photon_flux(pump_input),
        stiff_pump_marker: stiff_pump_marker(&points, pump_input),
        points,
        p1db,
    })
}

/// 10 log10 of pump input power over signal output power.
pub fn pump_to_output_db(point: &SaturationPoint, pump_input: f64) -> f64 {
    20.0 * pump_input.log10() - 20.0 * point.a_in_mag.log10() - point.g_db
}

/// Amplitude where the pump-to-output-signal ratio crosses 20 dB, by
/// interpolation in `log a_in`.
pub fn stiff_pump_marker(points: &[SaturationPoint], pump_input: f64) -> Option<f64> {
    let h: Vec<f64> = points
        .iter()
        .map(|p| pump_to_output_db(p, pump_input) - 20.0)
        .collect();
    let i = h.windows(2).position(|w| w[0] > 0.0 && w[1] <= 0.0)?;
    let (x0, x1) = (points[i].a_in_mag.ln(), points[i + 1].a_in_mag.ln());
    let x = x0 + h[i] * (x1 - x0) / (h[i] - h[i + 1]);
    Some(x.exp())
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    crate::linear::linspace(lo.ln(), hi.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}
