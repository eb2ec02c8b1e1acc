//! Classical pump steady state of the driven resonator.
//!
//! The normalized photon number `n = -K |alpha|^2 / omega0` solves
//!
//! ```text
//! F(n) = [1/(4Q^2) + (1 - Omega + S_N(n))^2] n - r^2 / (sqrt(27) Q^3) = 0
//! ```
//!
//! which has one or three roots. Roots are bracketed on a fixed hybrid grid
//! over `(0, N_MAX]` and polished by bisection followed by Newton steps.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::device::DerivedParams;
use crate::error::{JpaError, Result};
use crate::nonlinearity::{detuning_derivatives, detuning_term, Order};

/// Upper end of the root scan. `4 sqrt(N_MAX) = 8` rad of phase amplitude.
pub const N_MAX: f64 = 4.0;
const SCAN_POINTS: usize = 4000;
const GEOMETRIC_POINTS: usize = 1000;
const GEOMETRIC_START: f64 = 1e-12;
const GEOMETRIC_END: f64 = 1e-3;

/// Normalized pump: amplitude relative to the critical input field, pump
/// frequency relative to `omega0`, input phase and nonlinearity order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpDrive {
    pub r: f64,
    pub omega_rel: f64,
    pub phase: f64,
    pub order: Order,
}

impl PumpDrive {
    pub fn new(r: f64, omega_rel: f64, order: Order) -> Result<Self> {
        let d = PumpDrive {
            r,
            omega_rel,
            phase: 0.0,
            order,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_omega(mut self, omega_rel: f64) -> Self {
        self.omega_rel = omega_rel;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(JpaError::validation(
                "r",
                format!("must be >= 0, got {}", self.r),
            ));
        }
        if !(self.omega_rel.is_finite() && self.omega_rel > 0.0) {
            return Err(JpaError::validation(
                "omega_rel",
                format!("must be > 0, got {}", self.omega_rel),
            ));
        }
        if !self.phase.is_finite() {
            return Err(JpaError::validation("phase", "must be finite"));
        }
        Ok(())
    }
}

/// One branch of the pump response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub n: f64,
    pub alpha: Complex64,
    pub stable: bool,
    pub branch_count: usize,
}

/// Right-hand side constant `r^2 / (sqrt(27) Q^3)`.
fn drive_strength(r: f64, q: f64) -> f64 {
    r * r / (27f64.sqrt() * q.powi(3))
}

/// `F(n)` and `dF/dn`.
fn response(n: f64, q: f64, omega_rel: f64, r: f64, order: Order) -> Result<(f64, f64)> {
    let d = detuning_derivatives(n, order)?;
    let eff = 1.0 - omega_rel + d[0];
    let damping = 1.0 / (4.0 * q * q);
    let f = (damping + eff * eff) * n - drive_strength(r, q);
    let df = damping + eff * eff + 2.0 * eff * d[1] * n;
    Ok((f, df))
}

fn scan_grid() -> Vec<f64> {
    let ratio = (GEOMETRIC_END / GEOMETRIC_START).powf(1.0 / (GEOMETRIC_POINTS - 1) as f64);
    let mut grid: Vec<f64> = (0..GEOMETRIC_POINTS)
        .map(|i| GEOMETRIC_START * ratio.powi(i as i32))
        .collect();
    let linear = SCAN_POINTS - GEOMETRIC_POINTS;
    let step = (N_MAX - GEOMETRIC_END) / linear as f64;
    grid.extend((1..=linear).map(|i| GEOMETRIC_END + step * i as f64));
    grid
}

/// Scan grid with `S_N` tabulated on it. `S_N` does not depend on the drive,
/// so each order is tabulated once per process.
fn tabulated(order: Order) -> Result<Arc<(Vec<f64>, Vec<f64>)>> {
    type Table = Arc<(Vec<f64>, Vec<f64>)>;
    static TABLES: OnceLock<Mutex<HashMap<Order, Table>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().expect("table lock").get(&order) {
        return Ok(Arc::clone(t));
    }
    let grid = scan_grid();
    let s = grid
        .iter()
        .map(|&n| detuning_term(n, order))
        .collect::<Result<Vec<_>>>()?;
    let table = Arc::new((grid, s));
    tables
        .lock()
        .expect("table lock")
        .insert(order, Arc::clone(&table));
    Ok(table)
}

fn polish(
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
    eval: &impl Fn(f64) -> Result<(f64, f64)>,
) -> Result<f64> {
    let lo_negative = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
        let (f, _) = eval(mid)?;
        if f == 0.0 {
            return Ok(mid);
        }
        if (f < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let (f, df) = eval(x)?;
        if df == 0.0 {
            break;
        }
        let next = x - f / df;
        if !(next > lo && next < hi) {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// All steady-state photon numbers for `drive`, ascending, each tagged stable
/// when `dF/dn > 0`.
pub fn solve_photon_number(params: &DerivedParams, drive: &PumpDrive) -> Result<Vec<SteadyState>> {
    drive.validate()?;
    let q = params.q;
    if drive.r == 0.0 {
        return Ok(vec![SteadyState {
            n: 0.0,
            alpha: Complex64::new(0.0, 0.0),
            stable: true,
            branch_count: 1,
        }]);
    }
    let eval = |n: f64| response(n, q, drive.omega_rel, drive.r, drive.order);
    let table = tabulated(drive.order)?;
    let (grid, s) = (&table.0, &table.1);
    let damping = 1.0 / (4.0 * q * q);
    let rhs = drive_strength(drive.r, q);
    let values: Vec<f64> = grid
        .iter()
        .zip(s)
        .map(|(&n, &s)| {
            let eff = 1.0 - drive.omega_rel + s;
            (damping + eff * eff) * n - rhs
        })
        .collect();

    // F(0) = -r^2/(sqrt(27) Q^3) < 0, so a leading sign change covers the first cell.
    let mut prev_n = 0.0;
    let mut prev_f = -drive_strength(drive.r, q);
    let mut roots = Vec::new();
    for (&n, &f) in grid.iter().zip(&values) {
        if f == 0.0 {
            roots.push(n);
        } else if prev_f != 0.0 && (f < 0.0) != (prev_f < 0.0) {
            roots.push(polish(prev_n, n, prev_f, &eval)?);
        }
        prev_n = n;
        prev_f = f;
    }

    if roots.len() > 3 {
        return Err(JpaError::NumericalAnomaly(format!(
            "{} roots found in (0, {N_MAX}] for {drive:?}; physical responses have at most 3",
            roots.len()
        )));
    }
    if roots.len() % 2 == 0 {
        return Err(JpaError::NumericalAnomaly(format!(
            "{} roots found in (0, {N_MAX}] for {drive:?}; a branch lies beyond the scan range",
            roots.len()
        )));
    }
    let branch_count = roots.len();
    roots
        .into_iter()
        .map(|n| {
            let (_, df) = eval(n)?;
            let scale = 1.0 / (4.0 * q * q);
            // marginal roots (fold points) count as unstable
            let stable = df > 1e-9 * scale;
            let alpha = pump_amplitude(params, drive, n)?;
            Ok(SteadyState {
                n,
                alpha,
                stable,
                branch_count,
            })
        })
        .collect()
}

/// Branch used for gain calculations: the smallest stable photon number.
pub fn default_branch(states: &[SteadyState]) -> Option<&SteadyState> {
    states.iter().find(|s| s.stable)
}

/// Solves and returns the default branch.
pub fn solve_default_branch(params: &DerivedParams, drive: &PumpDrive) -> Result<SteadyState> {
    let states = solve_photon_number(params, drive)?;
    default_branch(&states)
        .copied()
        .ok_or_else(|| JpaError::NumericalAnomaly(format!("no stable pump branch for {drive:?}")))
}

/// Complex intra-resonator pump amplitude (photon-amplitude units) for a
/// photon number `n` obtained from [`solve_photon_number`].
pub fn pump_amplitude(params: &DerivedParams, drive: &PumpDrive, n: f64) -> Result<Complex64> {
    let q = params.q;
    let s = detuning_term(n, drive.order)?;
    let input = Complex64::from_polar(drive.r * params.alpha_in_crit, drive.phase);
    let denom = Complex64::new(1.0 / (2.0 * q), 1.0 - drive.omega_rel + s);
    let alpha = input / denom / (q * params.omega0).sqrt();
    let implied = alpha.norm_sqr() * (-params.kerr_ratio);
    let scale = n.abs().max(1e-300);
    if drive.r > 0.0 && ((implied - n) / scale).abs() > 1e-6 {
        return Err(JpaError::Consistency {
            expected: n,
            got: implied,
        });
    }
    Ok(alpha)
}

/// Reflection coefficient `alpha_out / alpha_in` of the pumped resonator.
/// Lossless, so `|S11| = 1`.
pub fn reflection_s11(drive: &PumpDrive, n: f64, q: f64) -> Result<Complex64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(JpaError::validation("q", format!("must be > 0, got {q}")));
    }
    let eff = 1.0 - drive.omega_rel + detuning_term(n, drive.order)?;
    let num = Complex64::new(0.5, -q * eff);
    Ok(num / num.conj())
}

/// Branch count on a rectangular `(omega_rel, r)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityDiagram {
    pub omega_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// `counts[i][j]` belongs to `omega_grid[i]`, `r_grid[j]`.
    pub counts: Vec<Vec<usize>>,
}

impl StabilityDiagram {
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.omega_grid.iter().enumerate().flat_map(move |(i, &w)| {
            self.r_grid
                .iter()
                .enumerate()
                .map(move |(j, &r)| (w, r, self.counts[i][j]))
        })
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(JpaError::validation(name, "grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(JpaError::validation(
            name,
            "grid contains non-finite values",
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(JpaError::validation(
            name,
            "grid must be strictly increasing",
        ));
    }
    Ok(())
}

/// Evaluates the branch count on every cell. Cells are solved in parallel
/// and assembled in grid order.
pub fn stability_diagram(
    params: &DerivedParams,
    omega_grid: &[f64],
    r_grid: &[f64],
    order: Order,
) -> Result<StabilityDiagram> {
    check_grid("omega_grid", omega_grid)?;
    check_grid("r_grid", r_grid)?;
    let counts = omega_grid
        .par_iter()
        .map(|&w| {
            r_grid
                .iter()
                .map(|&r| {
                    let drive = PumpDrive::new(r, w, order).map_err(|e| e.at_cell(w, r))?;
                    solve_photon_number(params, &drive)
                        .map(|s| s.first().map_or(0, |s| s.branch_count))
                        .map_err(|e| e.at_cell(w, r))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityDiagram {
        omega_grid: omega_grid.to_vec(),
        r_grid: r_grid.to_vec(),
        counts,
    })
}

/// Onset point of bistability: the triple root of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cusp {
    pub omega_rel: f64,
    pub r: f64,
    pub n: f64,
    /// max(|dF/dn|, |d2F/dn2|) at the returned point
    pub residual: f64,
    pub iterations: usize,
}

/// `(dF/dn, d2F/dn2)` and their Jacobian in `(n, delta)` with
/// `delta = 1 - Omega`. Neither depends on `r`.
fn cusp_system(n: f64, delta: f64, q: f64, order: Order) -> Result<([f64; 2], [[f64; 2]; 2])> {
    let [s, s1, s2, s3] = detuning_derivatives(n, order)?;
    let e = delta + s;
    let a = 1.0 / (4.0 * q * q);
    let f1 = a + e * e + 2.0 * e * s1 * n;
    let f2 = 4.0 * e * s1 + 2.0 * s1 * s1 * n + 2.0 * e * s2 * n;
    let f3 = 6.0 * s1 * s1 + 6.0 * e * s2 + 6.0 * s1 * s2 * n + 2.0 * e * s3 * n;
    let df1_dd = 2.0 * e + 2.0 * s1 * n;
    let df2_dd = 4.0 * s1 + 2.0 * s2 * n;
    Ok(([f1, f2], [[f2, df1_dd], [f3, df2_dd]]))
}

/// Locates the cusp by damped Newton on `dF/dn = d2F/dn2 = 0`, starting
/// from the analytic cubic cusp, then reads `r` off `F = 0`.
pub fn find_cusp(params: &DerivedParams, order: Order) -> Result<Cusp> {
    let q = params.q;
    let mut n = 1.0 / (3f64.sqrt() * q);
    let mut delta = 3f64.sqrt() / (2.0 * q);
    // residuals are O(1/Q^2); scale them to O(1) for the line search
    let weight = [4.0 * q * q, 4.0 * q];
    let norm = |v: [f64; 2]| ((v[0] * weight[0]).powi(2) + (v[1] * weight[1]).powi(2)).sqrt();

    const MAX_ITER: usize = 100;
    let (mut res, mut jac) = cusp_system(n, delta, q, order)?;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let converged = res[0].abs() < 1e-15 && res[1].abs() < 1e-13;
        if converged {
            break;
        }
        iterations += 1;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dn = (res[0] * jac[1][1] - res[1] * jac[0][1]) / det;
        let dd = (jac[0][0] * res[1] - jac[1][0] * res[0]) / det;
        let current = norm(res);
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-6 {
            let cand_n = n - step * dn;
            let cand_d = delta - step * dd;
            if cand_n > 0.0 && cand_n <= N_MAX {
                let (r2, j2) = cusp_system(cand_n, cand_d, q, order)?;
                if norm(r2) < current || norm(r2) == 0.0 {
                    n = cand_n;
                    delta = cand_d;
                    res = r2;
                    jac = j2;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = res[0].abs().max(res[1].abs());
    if residual >= 1e-10 || !n.is_finite() {
        return Err(JpaError::NonConvergence {
            what: "cusp Newton iteration",
            iterations,
            last: vec![n, 1.0 - delta],
        });
    }
    let s = detuning_term(n, order)?;
    let f_without_drive = (1.0 / (4.0 * q * q) + (delta + s).powi(2)) * n;
    let r = (f_without_drive * 27f64.sqrt() * q.powi(3)).sqrt();
    Ok(Cusp {
        omega_rel: 1.0 - delta,
        r,
        n,
        residual,
        iterations,
    })
}
