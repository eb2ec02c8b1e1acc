//! Acceptance criteria 1-12. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line; exits non-zero if any fails.

use std::time::Instant;

use jpa_core::classical_oracle::{compare_resonance_curves, OracleConfig};
use jpa_core::linear::{
    gain, linear_coefficients, linspace, match_pump_power, sweep_max_gain, GainMax,
};
use jpa_core::nonlinearity::detuning_term;
use jpa_core::saturation::{
    gain_at_amplitude, integrate_envelope, logspace, saturation_curve, EnvelopeModel, IdlerDrive,
    OmegaProtocol, SaturationCurve, SimConfig,
};
use jpa_core::steady_state::{
    find_cusp, reflection_s11, solve_default_branch, solve_photon_number,
};
use jpa_core::{DerivedParams, DeviceParams, Order, PumpDrive, Result};

const F0: f64 = 7e9;
const IC: f64 = 2e-6;
const R_KERR: f64 = 0.99;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn params(q: f64) -> DerivedParams {
    DeviceParams::new(F0, IC, q).unwrap().derive().unwrap()
}

fn omega_grid(q: f64) -> Vec<f64> {
    linspace(1.0 - 3.0 / q, 1.0, 121)
}

fn order(n: u32) -> Order {
    Order::finite(n).unwrap()
}

fn max_gain(q: f64, r: f64, order: Order) -> Result<GainMax> {
    let p = params(q);
    let grid = omega_grid(q);
    sweep_max_gain(&p, &PumpDrive::new(r, grid[0], order)?, &grid, 0.0)
}

/// Pump strength for the infinite-order model giving the Kerr gain at `R_KERR`.
fn matched_r(q: f64) -> Result<(f64, f64, f64)> {
    let p = params(q);
    let kerr = max_gain(q, R_KERR, Order::KERR)?;
    let m = match_pump_power(&p, Order::Infinite, kerr.gain_db, &omega_grid(q), 0.0)?;
    Ok((m.r, m.omega_rel, kerr.omega_rel))
}

fn cusp_reproduction() -> Result<Outcome> {
    let c = find_cusp(&params(30.0), Order::Infinite)?;
    let pass = (c.omega_rel - 0.96988).abs() <= 1e-3 && (c.r - 1.0401).abs() <= 1e-3;
    outcome(
        pass,
        format!(
            "omega={:.6} r={:.6}, expected (0.96988, 1.0401) +-1e-3; off by ({:+.2e}, {:+.2e})",
            c.omega_rel,
            c.r,
            c.omega_rel - 0.96988,
            c.r - 1.0401
        ),
    )
}

fn analytic_cubic_cusp() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for q in [10.0, 30.0, 150.0] {
        let c = find_cusp(&params(q), Order::KERR)?;
        let expected = 1.0 - 3f64.sqrt() / (2.0 * q);
        worst = worst
            .max((c.omega_rel - expected).abs())
            .max((c.r - 1.0).abs());
    }
    outcome(
        worst < 1e-6,
        format!("max deviation {worst:.2e} over Q = 10, 30, 150 (limit 1e-6)"),
    )
}

fn series_vs_bessel() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in linspace(0.0, 2.0, 200) {
        worst =
            worst.max((detuning_term(n, order(40))? - detuning_term(n, Order::Infinite)?).abs());
    }
    outcome(
        worst < 1e-10,
        format!("max |S_40 - S_inf| = {worst:.2e} over 200 points (limit 1e-10)"),
    )
}

/// 100 x 100 grid of (omega, delta) at Q = 30, r = 0.99.
fn gain_grid() -> (Vec<f64>, Vec<f64>) {
    let q = 30.0;
    (
        linspace(1.0 - 3.0 / q, 1.0 + 1.0 / q, 100),
        linspace(-3.0 / q, 3.0 / q, 100),
    )
}

fn gain_relation() -> Result<Outcome> {
    let p = params(30.0);
    let (omegas, deltas) = gain_grid();
    let mut worst: f64 = 0.0;
    for ord in [Order::KERR, Order::Infinite] {
        for &w in &omegas {
            let drive = PumpDrive::new(R_KERR, w, ord)?;
            let ss = solve_default_branch(&p, &drive)?;
            let co = linear_coefficients(&p, &drive, &ss)?;
            for &d in &deltas {
                let g = gain(&co, p.q, d)?;
                worst = worst.max((g.g.norm_sqr() - g.m.norm_sqr() - 1.0).abs());
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("max ||g|^2 - |m|^2 - 1| = {worst:.2e} over 2 x 100 x 100 (limit 1e-9)"),
    )
}

fn unit_reflection() -> Result<Outcome> {
    let p = params(30.0);
    let (omegas, _) = gain_grid();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for ord in [Order::KERR, Order::Infinite] {
        for &w in &omegas {
            let drive = PumpDrive::new(R_KERR, w, ord)?;
            for s in solve_photon_number(&p, &drive)? {
                worst = worst.max((reflection_s11(&drive, s.n, p.q)?.norm() - 1.0).abs());
                count += 1;
            }
        }
    }
    outcome(
        worst < 1e-12,
        format!("max ||S11| - 1| = {worst:.2e} over {count} states (limit 1e-12)"),
    )
}

fn power_match() -> Result<Outcome> {
    let (r, _, _) = matched_r(30.0)?;
    outcome(
        (r - 1.00297).abs() <= 0.002,
        format!("r = {r:.6}, expected 1.00297 +- 0.002"),
    )
}

fn gain_ordering() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for q in [10.0, 30.0] {
        let g: Vec<f64> = [Order::KERR, order(2), order(3), Order::Infinite]
            .into_iter()
            .map(|o| max_gain(q, R_KERR, o).map(|m| m.gain_db))
            .collect::<Result<_>>()?;
        let ok = g[0] > g[1] && g[1] >= g[2] && g[2] >= g[3];
        pass &= ok;
        parts.push(format!(
            "Q={q}: N=1 {:.4}, N=2 {:.4}, N=3 {:.4}, N=inf {:.4} dB ({})",
            g[0],
            g[1],
            g[2],
            g[3],
            if ok { "ordered" } else { "not ordered" }
        ));
    }
    let diff = (max_gain(150.0, R_KERR, Order::KERR)?.gain_db
        - max_gain(150.0, R_KERR, Order::Infinite)?.gain_db)
        .abs();
    pass &= diff < 0.5;
    parts.push(format!("Q=150: |G1 - Ginf| = {diff:.3} dB (limit 0.5)"));
    outcome(pass, parts.join("; "))
}

fn ode_linear_agreement() -> Result<Outcome> {
    let p = params(30.0);
    let (r_match, w_match, w_kerr) = matched_r(30.0)?;
    let sim = SimConfig::default();
    let cases = [
        (EnvelopeModel::Cubic, R_KERR, w_kerr, Order::KERR),
        (EnvelopeModel::CubicC3Only, R_KERR, w_kerr, Order::KERR),
        (EnvelopeModel::Linear, R_KERR, w_kerr, Order::KERR),
        (EnvelopeModel::FullSine, r_match, w_match, Order::Infinite),
        (EnvelopeModel::Linear, r_match, w_match, Order::Infinite),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut all_converged = true;
    for (model, r, w, ord) in cases {
        let drive = PumpDrive::new(r, w, ord)?;
        let ss = solve_default_branch(&p, &drive)?;
        let closed = gain(&linear_coefficients(&p, &drive, &ss)?, p.q, 0.0)?.gain_db;
        let pt = gain_at_amplitude(model, &p, &drive, &ss, 1e-6 * p.pump_input(r), 0.0, &sim)?;
        let err = (pt.g_db - closed).abs();
        worst = worst.max(err);
        all_converged &= pt.converged;
        parts.push(format!("{model}/N={ord}: {err:.1e} dB"));
    }
    outcome(
        worst < 0.05 && all_converged,
        format!(
            "{} (limit 0.05 dB, all converged: {all_converged})",
            parts.join(", ")
        ),
    )
}

fn curve(
    model: EnvelopeModel,
    r: f64,
    w: f64,
    ord: Order,
    p: &DerivedParams,
    rel: &[f64],
) -> Result<SaturationCurve> {
    let drive = PumpDrive::new(r, w, ord)?;
    let amps: Vec<f64> = rel.iter().map(|a| a * p.pump_input(r)).collect();
    saturation_curve(
        model,
        p,
        &drive,
        &amps,
        0.0,
        &SimConfig::default(),
        &OmegaProtocol::Fixed,
    )
}

/// Largest rise between neighbours once the gain has dropped 0.1 dB.
fn rise_after_compression(c: &SaturationCurve) -> f64 {
    let Some(start) = c.points.iter().position(|pt| pt.g_db < c.g0_db - 0.1) else {
        return 0.0;
    };
    c.points[start..]
        .windows(2)
        .map(|w| w[1].g_db - w[0].g_db)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

fn saturation_shape() -> Result<Outcome> {
    let p = params(30.0);
    let (r_match, w_match, w_kerr) = matched_r(30.0)?;
    let rel = logspace(1e-6, 1e-2, 17);
    let cubic = curve(EnvelopeModel::Cubic, R_KERR, w_kerr, Order::KERR, &p, &rel)?;
    let c3 = curve(
        EnvelopeModel::CubicC3Only,
        R_KERR,
        w_kerr,
        Order::KERR,
        &p,
        &rel,
    )?;
    let sine = curve(
        EnvelopeModel::FullSine,
        r_match,
        w_match,
        Order::Infinite,
        &p,
        &rel,
    )?;

    let rise_cubic = rise_after_compression(&cubic);
    let rise_sine = rise_after_compression(&sine);
    let marker = cubic.stiff_pump_marker.unwrap_or(f64::INFINITY);
    let track = cubic
        .points
        .iter()
        .zip(&c3.points)
        .filter(|(a, _)| a.a_in_mag <= marker)
        .map(|(a, b)| (a.g_db - b.g_db).abs())
        .fold(0.0, f64::max);
    let converged = [&cubic, &c3, &sine]
        .iter()
        .all(|c| c.points.iter().all(|pt| pt.converged));
    let pass = rise_cubic <= 0.02
        && rise_sine <= 0.02
        && track < 1.0
        && cubic.p1db.is_some()
        && sine.p1db.is_some()
        && cubic.stiff_pump_marker.is_some()
        && converged;
    let rel_p1db = |c: &SaturationCurve| {
        c.p1db
            .map(|a| format!("{:.3e}", a / c.pump_input))
            .unwrap_or("none".into())
    };
    outcome(
        pass,
        format!(
            "rise after -0.1 dB: cubic {rise_cubic:.3} dB, full-sine {rise_sine:.3} dB (limit 0.02); \
             c3-only vs cubic up to marker {track:.3} dB (limit 1); p1db/pump: cubic {}, full-sine {}; converged: {converged}",
            rel_p1db(&cubic),
            rel_p1db(&sine)
        ),
    )
}

fn dynamic_range() -> Result<Outcome> {
    let base = params(30.0);
    let (r_match, w_match, _) = matched_r(30.0)?;
    let rel = logspace(1e-5, 1e-2, 13);
    let mut p1db = Vec::new();
    for ratio in [-1.0, -10.0, -100.0] {
        let p = DeviceParams::with_kerr_ratio(F0, base.q, ratio)?.derive()?;
        let c = curve(
            EnvelopeModel::FullSine,
            r_match,
            w_match,
            Order::Infinite,
            &p,
            &rel,
        )?;
        p1db.push((ratio, c.p1db));
    }
    let values: Option<Vec<f64>> = p1db.iter().map(|(_, v)| *v).collect();
    let pass = values.is_some_and(|v| v.windows(2).all(|w| w[1] > w[0]));
    let parts: Vec<String> = p1db
        .iter()
        .map(|(ratio, v)| {
            format!(
                "ratio {ratio}: {}",
                v.map(|x| format!("{x:.4e}")).unwrap_or("none".into())
            )
        })
        .collect();
    outcome(
        pass,
        format!("p1db (sqrt(omega0) units) {}", parts.join(", ")),
    )
}

fn classical_oracle() -> Result<Outcome> {
    let rep = compare_resonance_curves(
        &params(30.0),
        0.5,
        &linspace(0.95, 1.03, 81),
        &OracleConfig::default(),
    )?;
    outcome(
        rep.max_rel_dev < 0.02 && rep.flagged == 0,
        format!(
            "max relative deviation {:.2}% at omega={:.4} (limit 2%), {} flagged points",
            100.0 * rep.max_rel_dev,
            rep.worst_omega,
            rep.flagged
        ),
    )
}

fn conjugate_closure() -> Result<Outcome> {
    let p = params(30.0);
    let (r_match, w_match, w_kerr) = matched_r(30.0)?;
    let sim = SimConfig {
        idler_drive: IdlerDrive::Conjugate,
        ..SimConfig::default()
    };
    let mut worst: f64 = 0.0;
    let mut steps = 0;
    for model in EnvelopeModel::ALL {
        let (r, w, ord) = match model {
            EnvelopeModel::Cubic | EnvelopeModel::CubicC3Only => (R_KERR, w_kerr, Order::KERR),
            _ => (r_match, w_match, Order::Infinite),
        };
        let drive = PumpDrive::new(r, w, ord)?;
        let ss = solve_default_branch(&p, &drive)?;
        let timing = sim.resolve(p.q, 0.0, &linear_coefficients(&p, &drive, &ss)?)?;
        for rel in logspace(1e-6, 1e-2, 9) {
            let run = integrate_envelope(
                model,
                &p,
                &drive,
                &ss,
                rel * p.pump_input(r),
                0.0,
                &sim,
                &timing,
            )?;
            steps += run.len();
            worst = run
                .iter()
                .map(|s| (s.v - s.u.conj()).norm())
                .fold(worst, f64::max);
        }
    }
    outcome(
        worst < 1e-9,
        format!("max |v - u*| = {worst:.2e} over {steps} states (limit 1e-9)"),
    )
}

fn main() {
    type Check = fn() -> Result<Outcome>;
    let criteria: [(&str, Check); 12] = [
        ("cusp reproduction", cusp_reproduction),
        ("analytic cubic cusp", analytic_cubic_cusp),
        ("series vs Bessel", series_vs_bessel),
        ("gain relation", gain_relation),
        ("unit reflection", unit_reflection),
        ("power match", power_match),
        ("gain ordering", gain_ordering),
        ("ODE vs linear gain", ode_linear_agreement),
        ("saturation shape", saturation_shape),
        ("dynamic range", dynamic_range),
        ("classical oracle", classical_oracle),
        ("conjugate closure", conjugate_closure),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        passed += pass as usize;
        println!(
            "criterion {:>2} {}: {} [{:.1} s] {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64(),
            detail
        );
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
