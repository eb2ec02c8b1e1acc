//! Stiff-pump linear response: signal/idler coupling coefficients, the
//! phase-insensitive gain and the sweeps built on it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::device::DerivedParams;
use crate::error::{JpaError, Result};
use crate::nonlinearity::{idler_weight, signal_shift, Order};
use crate::steady_state::{find_cusp, solve_default_branch, PumpDrive, SteadyState};

/// Smallest `|den|` accepted by [`gain`] before reporting a pole.
pub const POLE_THRESHOLD: f64 = 1e-15;

/// Coefficients of `da/dtau = l1 a + l2 a^dagger + drive`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearCoefficients {
    pub l1: Complex64,
    pub l2: Complex64,
}

/// Signal gain `g`, idler conversion `m` and power gain `G = |g|^2` at
/// detuning `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearGain {
    pub delta: f64,
    pub g: Complex64,
    pub m: Complex64,
    pub gain: f64,
    pub gain_db: f64,
}

pub fn linear_coefficients(
    params: &DerivedParams,
    drive: &PumpDrive,
    ss: &SteadyState,
) -> Result<LinearCoefficients> {
    let q = params.q;
    let shift = signal_shift(ss.n, drive.order)?;
    let weight = idler_weight(ss.n, drive.order)?;
    let l1 = Complex64::new(-1.0 / (2.0 * q), drive.omega_rel - 1.0 - shift);
    let l2 = -Complex64::i() * ss.alpha * ss.alpha * params.kerr_ratio * weight;
    Ok(LinearCoefficients { l1, l2 })
}

pub fn gain(co: &LinearCoefficients, q: f64, delta: f64) -> Result<LinearGain> {
    let shift = Complex64::new(0.0, delta);
    let a = co.l1 + shift;
    let b = co.l1.conj() + shift;
    let den = a * b - co.l2.norm_sqr();
    if den.norm() < POLE_THRESHOLD {
        return Err(JpaError::Pole {
            denominator: den.norm(),
        });
    }
    let g = -b / den / q - 1.0;
    let m = co.l2 / den / q;
    let power = g.norm_sqr();
    Ok(LinearGain {
        delta,
        g,
        m,
        gain: power,
        gain_db: 10.0 * power.log10(),
    })
}

/// One point of a gain-versus-pump-frequency curve. A pole is stored with
/// `gain_db = +inf` and NaN `g`, `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega_rel: f64,
    pub n: f64,
    pub gain_db: f64,
    pub g: Complex64,
    pub m: Complex64,
}

impl SweepPoint {
    pub fn is_pole(&self) -> bool {
        self.gain_db == f64::INFINITY
    }
}

/// Location and height of the gain maximum over pump frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainMax {
    pub omega_rel: f64,
    pub gain_db: f64,
}

fn check_omega_grid(omega_grid: &[f64]) -> Result<()> {
    if omega_grid.is_empty() {
        return Err(JpaError::validation("omega_grid", "empty"));
    }
    if let Some(w) = omega_grid
        .iter()
        .find(|w| !(w.is_finite() && **w > 0.0 && **w < 2.0))
    {
        return Err(JpaError::validation(
            "omega_grid",
            format!("values must lie in (0, 2), got {w}"),
        ));
    }
    if omega_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(JpaError::validation(
            "omega_grid",
            "must be strictly increasing",
        ));
    }
    Ok(())
}

/// Gain at one pump frequency on the default branch.
pub fn sweep_point(params: &DerivedParams, drive: &PumpDrive, delta: f64) -> Result<SweepPoint> {
    let ss = solve_default_branch(params, drive)?;
    let co = linear_coefficients(params, drive, &ss)?;
    match gain(&co, params.q, delta) {
        Ok(lg) => Ok(SweepPoint {
            omega_rel: drive.omega_rel,
            n: ss.n,
            gain_db: lg.gain_db,
            g: lg.g,
            m: lg.m,
        }),
        Err(JpaError::Pole { .. }) => Ok(SweepPoint {
            omega_rel: drive.omega_rel,
            n: ss.n,
            gain_db: f64::INFINITY,
            g: Complex64::new(f64::NAN, f64::NAN),
            m: Complex64::new(f64::NAN, f64::NAN),
        }),
        Err(e) => Err(e),
    }
}

/// Gain versus pump frequency with `drive.r`, `drive.phase` and
/// `drive.order` held fixed.
pub fn gain_sweep(
    params: &DerivedParams,
    drive: &PumpDrive,
    omega_grid: &[f64],
    delta: f64,
) -> Result<Vec<SweepPoint>> {
    check_omega_grid(omega_grid)?;
    omega_grid
        .par_iter()
        .map(|&w| {
            sweep_point(params, &drive.with_omega(w), delta).map_err(|e| e.at_cell(w, drive.r))
        })
        .collect()
}

/// Refines the largest finite point of `curve` by repeated three-point
/// parabolic fits on the dB gain until the step falls below `1e-7`.
pub fn max_gain(
    params: &DerivedParams,
    drive: &PumpDrive,
    curve: &[SweepPoint],
    delta: f64,
) -> Result<GainMax> {
    let (best, _) = curve
        .iter()
        .enumerate()
        .filter(|(_, p)| p.gain_db.is_finite())
        .max_by(|a, b| a.1.gain_db.total_cmp(&b.1.gain_db))
        .ok_or_else(|| JpaError::NumericalAnomaly("no finite gain on the sweep".into()))?;
    if curve.len() < 2 {
        return Ok(GainMax {
            omega_rel: curve[best].omega_rel,
            gain_db: curve[best].gain_db,
        });
    }
    let lo = curve[0].omega_rel;
    let hi = curve[curve.len() - 1].omega_rel;
    let spacing = |i: usize| {
        let left = if i > 0 {
            curve[i].omega_rel - curve[i - 1].omega_rel
        } else {
            0.0
        };
        let right = if i + 1 < curve.len() {
            curve[i + 1].omega_rel - curve[i].omega_rel
        } else {
            0.0
        };
        left.max(right)
    };
    let eval =
        |w: f64| -> Result<f64> { Ok(sweep_point(params, &drive.with_omega(w), delta)?.gain_db) };

    let mut c = curve[best].omega_rel;
    let mut fc = curve[best].gain_db;
    let mut h = spacing(best);
    let mut guard = 0;
    while h > 1e-7 && guard < 200 {
        guard += 1;
        let (a, b) = ((c - h).max(lo), (c + h).min(hi));
        let (fa, fb) = (eval(a)?, eval(b)?);
        if !(fa.is_finite() && fb.is_finite()) {
            break;
        }
        if fa > fc || fb > fc {
            // walk uphill at the current scale
            if fa > fb {
                c = a;
                fc = fa;
            } else {
                c = b;
                fc = fb;
            }
            continue;
        }
        let (da, db) = (c - a, b - c);
        let vertex = if da > 0.0 && db > 0.0 {
            // vertex of the parabola through (a, fa), (c, fc), (b, fb)
            let num = da * da * (fc - fb) - db * db * (fc - fa);
            let den = da * (fc - fb) + db * (fc - fa);
            if den != 0.0 {
                c - 0.5 * num / den
            } else {
                c
            }
        } else {
            c
        };
        let vertex = vertex.clamp(a, b);
        let fv = eval(vertex)?;
        if fv.is_finite() && fv >= fc {
            c = vertex;
            fc = fv;
        }
        h /= 4.0;
    }
    Ok(GainMax {
        omega_rel: c,
        gain_db: fc,
    })
}

/// Sweep followed by [`max_gain`].
pub fn sweep_max_gain(
    params: &DerivedParams,
    drive: &PumpDrive,
    omega_grid: &[f64],
    delta: f64,
) -> Result<GainMax> {
    let curve = gain_sweep(params, drive, omega_grid, delta)?;
    max_gain(params, drive, &curve, delta)
}

/// Outcome of [`match_pump_power`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPower {
    pub r: f64,
    pub omega_rel: f64,
    pub gain_db: f64,
    pub iterations: usize,
}

/// Finds the pump amplitude `r` whose maximal gain over `omega_grid`
/// equals `target_db` (within 1e-4 dB), bisecting on `r` below the cusp.
pub fn match_pump_power(
    params: &DerivedParams,
    order: Order,
    target_db: f64,
    omega_grid: &[f64],
    delta: f64,
) -> Result<MatchedPower> {
    check_omega_grid(omega_grid)?;
    if !(target_db.is_finite() && target_db >= 0.0) {
        return Err(JpaError::validation(
            "target_db",
            format!("must be finite and >= 0, got {target_db}"),
        ));
    }
    let template = PumpDrive::new(0.0, omega_grid[0], order)?;
    if target_db == 0.0 {
        let g = sweep_max_gain(params, &template, omega_grid, delta)?;
        return Ok(MatchedPower {
            r: 0.0,
            omega_rel: g.omega_rel,
            gain_db: g.gain_db,
            iterations: 0,
        });
    }
    let cusp = find_cusp(params, order)?;
    let at = |r: f64| sweep_max_gain(params, &template.with_r(r), omega_grid, delta);

    let mut hi = cusp.r * (1.0 - 1e-9);
    let top = at(hi)?;
    if top.gain_db < target_db {
        return Err(JpaError::Unattainable(format!(
            "target {target_db} dB exceeds {} dB reached at r = {hi} just below the bistability onset",
            top.gain_db
        )));
    }
    let mut lo = 0.0;
    let mut best = top;
    let mut best_r = hi;
    let mut iterations = 0;
    while iterations < 100 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let g = at(mid)?;
        best = g;
        best_r = mid;
        if (g.gain_db - target_db).abs() < 1e-4 || hi - lo < 1e-14 {
            break;
        }
        if g.gain_db < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MatchedPower {
        r: best_r,
        omega_rel: best.omega_rel,
        gain_db: best.gain_db,
        iterations,
    })
}

/// Full width of the region around the maximum where the power gain stays
/// above half its peak, from linear interpolation between curve points.
/// `None` when the curve does not fall below half maximum on both sides.
pub fn half_max_width(curve: &[SweepPoint]) -> Option<f64> {
    let lin: Vec<f64> = curve.iter().map(|p| 10f64.powf(p.gain_db / 10.0)).collect();
    let (peak, &gmax) = lin
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = gmax / 2.0;
    let cross = |i: usize, j: usize| {
        let (wi, wj) = (curve[i].omega_rel, curve[j].omega_rel);
        wi + (half - lin[i]) * (wj - wi) / (lin[j] - lin[i])
    };
    let left = (1..=peak)
        .rev()
        .find(|&i| lin[i - 1] < half)
        .map(|i| cross(i - 1, i))?;
    let right = (peak..curve.len() - 1)
        .find(|&i| lin[i + 1] < half)
        .map(|i| cross(i, i + 1))?;
    Some(right - left)
}

/// Evenly spaced grid of `points` values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}
