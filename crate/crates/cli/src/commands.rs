use anyhow::bail;
use jpa_core::classical_oracle::{compare_resonance_curves, OracleConfig};
use jpa_core::linear::{
    gain_sweep, half_max_width, linspace, match_pump_power, max_gain, sweep_max_gain,
};
use jpa_core::saturation::{
    saturation_curve, EnvelopeModel, OmegaProtocol, SaturationCurve, SimConfig,
};
use jpa_core::steady_state::{find_cusp, reflection_s11, solve_photon_number, stability_diagram};
use jpa_core::{DerivedParams, DeviceParams, Order, PumpDrive};
use serde_json::{json, Value};

use crate::config::{invalid, pick, require_positive, Grid, Protocol, RunConfig, TargetSpec};
use crate::output::{to_value, Cell, Report, Table};

pub struct SteadyArgs {
    pub r: Option<f64>,
    pub omega: Option<Grid>,
    pub orders: Option<Vec<Order>>,
}

pub struct StabilityArgs {
    pub omega: Option<Grid>,
    pub r_grid: Option<Grid>,
    pub orders: Option<Vec<Order>>,
}

pub struct LingainArgs {
    pub r: Option<f64>,
    pub orders: Option<Vec<Order>>,
    pub q: Option<Vec<f64>>,
    pub omega: Option<Grid>,
    pub delta: Option<f64>,
}

pub struct MatchArgs {
    pub target_from: Option<TargetSpec>,
    pub target_db: Option<f64>,
    pub orders: Option<Vec<Order>>,
    pub omega: Option<Grid>,
    pub delta: Option<f64>,
}

pub struct SaturationArgs {
    pub models: Option<Vec<EnvelopeModel>>,
    pub r: Option<f64>,
    pub orders: Option<Vec<Order>>,
    pub omega_fixed: Option<f64>,
    pub omega: Option<Grid>,
    pub amplitudes: Option<Grid>,
    pub delta: Option<f64>,
    pub protocol: Option<Protocol>,
    pub ratios: Option<Vec<f64>>,
}

pub struct OracleArgs {
    pub r: Option<f64>,
    pub omega: Option<Grid>,
}

fn derived(config: &RunConfig) -> anyhow::Result<(DeviceParams, DerivedParams)> {
    let device = config.device.ok_or_else(|| {
        invalid(
            "device",
            "no device given; use --device or a \"device\" block in --config",
        )
    })?;
    Ok((device, device.derive()?))
}

fn single_order(orders: &[Order]) -> anyhow::Result<Order> {
    match orders {
        [order] => Ok(*order),
        _ => bail!(invalid(
            "orders",
            format!("this command takes exactly one order, got {}", orders.len())
        )),
    }
}

fn checked_grid(grid: Grid, field: &'static str) -> anyhow::Result<Vec<f64>> {
    grid.validate(field)?;
    Ok(grid.values())
}

/// Pump-frequency window used when none is given: from `1 - 4/Q` to `1 + 1/Q`.
fn default_omega(q: f64) -> Grid {
    Grid::new((1.0 - 4.0 / q).max(0.05), (1.0 + 1.0 / q).min(1.95), 401)
}

fn meta_derived(params: &DerivedParams) -> Vec<(String, Value)> {
    vec![("derived".into(), to_value(params))]
}

pub fn steady(args: SteadyArgs, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (_, params) = derived(config)?;
    let r = pick(args.r, &mut config.r, || 0.99);
    let order = single_order(&pick(args.orders, &mut config.orders, || {
        vec![Order::Infinite]
    }))?;
    let grid = checked_grid(
        pick(args.omega, &mut config.omega, || default_omega(params.q)),
        "omega",
    )?;
    let mut table = Table::new(&[
        "omega_rel",
        "n",
        "stable",
        "re_alpha",
        "im_alpha",
        "re_s11",
        "im_s11",
        "branch_count",
    ]);
    let mut bistable = 0;
    for &w in &grid {
        let drive = PumpDrive::new(r, w, order)?;
        let states = solve_photon_number(&params, &drive).map_err(|e| e.at_cell(w, r))?;
        if states.len() == 3 {
            bistable += 1;
        }
        for s in states {
            let s11 = reflection_s11(&drive, s.n, params.q)?;
            table.push(vec![
                w.into(),
                s.n.into(),
                s.stable.into(),
                s.alpha.re.into(),
                s.alpha.im.into(),
                s11.re.into(),
                s11.im.into(),
                s.branch_count.into(),
            ]);
        }
    }
    Ok(Report {
        command: "steady",
        line: format!(
            "steady: {} pump frequencies, {bistable} with three branches",
            grid.len()
        ),
        summary: json!({ "points": grid.len(), "bistable_points": bistable }),
        table,
        meta: meta_derived(&params),
    })
}

pub fn stability(args: StabilityArgs, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (_, params) = derived(config)?;
    let order = single_order(&pick(args.orders, &mut config.orders, || {
        vec![Order::Infinite]
    }))?;
    let q = params.q;
    let omega = checked_grid(
        pick(args.omega, &mut config.omega, || {
            Grid::new(1.0 - 3.0 / q, 1.0, 121)
        }),
        "omega",
    )?;
    let r_grid = checked_grid(
        pick(args.r_grid, &mut config.r_grid, || Grid::new(0.0, 1.5, 151)),
        "r_grid",
    )?;
    let diag = stability_diagram(&params, &omega, &r_grid, order)?;
    let mut table = Table::new(&["omega_rel", "r", "branch_count"]);
    let mut bistable = 0;
    for (w, r, count) in diag.cells() {
        if count == 3 {
            bistable += 1;
        }
        table.push(vec![w.into(), r.into(), count.into()]);
    }
    let cusp = find_cusp(&params, order).ok();
    let mut line = format!("stability: {} cells, {bistable} bistable", table.rows.len());
    if let Some(c) = &cusp {
        line.push_str(&format!(", cusp omega={} r={}", c.omega_rel, c.r));
    }
    let mut meta = meta_derived(&params);
    meta.push(("cusp".into(), to_value(&cusp)));
    Ok(Report {
        command: "stability",
        line,
        summary: json!({ "cells": table.rows.len(), "bistable_cells": bistable, "cusp": cusp }),
        table,
        meta,
    })
}

pub fn cusp(orders: Option<Vec<Order>>, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (_, params) = derived(config)?;
    let orders = pick(orders, &mut config.orders, || vec![Order::Infinite]);
    if orders.is_empty() {
        bail!(invalid("orders", "empty"));
    }
    let mut table = Table::new(&[
        "order",
        "q",
        "omega_rel",
        "r",
        "n",
        "residual",
        "iterations",
    ]);
    let mut found = Vec::new();
    for &order in &orders {
        let c = find_cusp(&params, order)?;
        table.push(vec![
            order.to_string().into(),
            params.q.into(),
            c.omega_rel.into(),
            c.r.into(),
            c.n.into(),
            c.residual.into(),
            c.iterations.into(),
        ]);
        found.push((order, c));
    }
    let line = if let [(_, c)] = found.as_slice() {
        format!("omega={} r={}", c.omega_rel, c.r)
    } else {
        found
            .iter()
            .map(|(o, c)| format!("order={o} omega={} r={}", c.omega_rel, c.r))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let summary: Vec<Value> = found
        .iter()
        .map(|(o, c)| json!({ "order": o, "cusp": c }))
        .collect();
    Ok(Report {
        command: "cusp",
        line,
        summary: Value::Array(summary),
        table,
        meta: meta_derived(&params),
    })
}

pub fn lingain(args: LingainArgs, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (device, _) = derived(config)?;
    let r = pick(args.r, &mut config.r, || 0.99);
    let orders = pick(args.orders, &mut config.orders, || {
        vec![
            Order::KERR,
            Order::finite(2).unwrap(),
            Order::finite(3).unwrap(),
            Order::Infinite,
        ]
    });
    let qs = pick(args.q, &mut config.q, || vec![device.q]);
    if orders.is_empty() || qs.is_empty() {
        bail!(invalid("orders", "need at least one order and one Q"));
    }
    let q_min = qs.iter().copied().fold(f64::INFINITY, f64::min);
    let grid = checked_grid(
        pick(args.omega, &mut config.omega, || default_omega(q_min)),
        "omega",
    )?;
    let delta = pick(args.delta, &mut config.delta, || 0.0);

    let mut table = Table::new(&[
        "q",
        "order",
        "omega_rel",
        "n",
        "G_db",
        "re_g",
        "im_g",
        "re_m",
        "im_m",
    ]);
    let mut maxima = Vec::new();
    let mut derived_all = Vec::new();
    for &q in &qs {
        let params = DeviceParams { q, ..device }.derive()?;
        derived_all.push(to_value(&params));
        for &order in &orders {
            let drive = PumpDrive::new(r, grid[0], order)?;
            let curve = gain_sweep(&params, &drive, &grid, delta)?;
            for p in &curve {
                table.push(vec![
                    q.into(),
                    order.to_string().into(),
                    p.omega_rel.into(),
                    p.n.into(),
                    p.gain_db.into(),
                    p.g.re.into(),
                    p.g.im.into(),
                    p.m.re.into(),
                    p.m.im.into(),
                ]);
            }
            let best = max_gain(&params, &drive, &curve, delta)?;
            maxima.push(json!({
                "q": q,
                "order": order,
                "omega_rel": best.omega_rel,
                "gain_db": best.gain_db,
                "half_max_width": half_max_width(&curve),
            }));
        }
    }
    let line = maxima
        .iter()
        .map(|m| {
            format!(
                "q={} order={} G_max={:.4} dB at omega={:.6}",
                m["q"],
                m["order"]
                    .as_str()
                    .map(str::to_string)
                    .unwrap_or_else(|| m["order"].to_string()),
                m["gain_db"].as_f64().unwrap_or(f64::NAN),
                m["omega_rel"].as_f64().unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Report {
        command: "lingain",
        line: format!("lingain: {line}"),
        summary: json!({ "maxima": maxima }),
        table,
        meta: vec![("derived".into(), Value::Array(derived_all))],
    })
}

pub fn match_power(args: MatchArgs, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (_, params) = derived(config)?;
    let order = single_order(&pick(args.orders, &mut config.orders, || {
        vec![Order::Infinite]
    }))?;
    let grid = checked_grid(
        pick(args.omega, &mut config.omega, || default_omega(params.q)),
        "omega",
    )?;
    let delta = pick(args.delta, &mut config.delta, || 0.0);
    let explicit = args.target_db.or(config.target_db);
    let (target_db, reference) = match explicit {
        Some(t) => {
            config.target_db = Some(t);
            (t, Value::Null)
        }
        None => {
            let reference = pick(args.target_from, &mut config.target_from, || TargetSpec {
                order: Order::KERR,
                r: 0.99,
            });
            let drive = PumpDrive::new(reference.r, grid[0], reference.order)?;
            let best = sweep_max_gain(&params, &drive, &grid, delta)?;
            (
                best.gain_db,
                json!({ "order": reference.order, "r": reference.r, "maximum": best }),
            )
        }
    };
    let m = match_pump_power(&params, order, target_db, &grid, delta)?;
    let mut table = Table::new(&["order", "target_db", "r", "omega_rel", "gain_db"]);
    table.push(vec![
        order.to_string().into(),
        target_db.into(),
        m.r.into(),
        m.omega_rel.into(),
        m.gain_db.into(),
    ]);
    Ok(Report {
        command: "match-power",
        line: format!("r={} G_max_db={} omega={}", m.r, m.gain_db, m.omega_rel),
        summary: json!({ "target_db": target_db, "reference": reference, "matched": m }),
        table,
        meta: meta_derived(&params),
    })
}

/// Pump frequency of the small-signal gain maximum, unless fixed by the user.
fn operating_omega(
    params: &DerivedParams,
    r: f64,
    order: Order,
    delta: f64,
    args_fixed: Option<f64>,
    config: &mut RunConfig,
) -> anyhow::Result<f64> {
    if let Some(w) = args_fixed.or(config.omega_fixed) {
        config.omega_fixed = Some(w);
        return require_positive("omega_fixed", w);
    }
    let grid = default_omega(params.q).values();
    let best = sweep_max_gain(params, &PumpDrive::new(r, grid[0], order)?, &grid, delta)?;
    config.omega_fixed = Some(best.omega_rel);
    Ok(best.omega_rel)
}

struct SaturationSetup {
    r: f64,
    order: Order,
    delta: f64,
    relative_amps: Vec<f64>,
    sim: SimConfig,
    protocol: Protocol,
}

fn saturation_setup(
    args: &SaturationArgs,
    config: &mut RunConfig,
) -> anyhow::Result<SaturationSetup> {
    let r = pick(args.r, &mut config.r, || 0.99);
    let order = single_order(&pick(args.orders.clone(), &mut config.orders, || {
        vec![Order::Infinite]
    }))?;
    let delta = pick(args.delta, &mut config.delta, || 0.0);
    let amps = pick(args.amplitudes, &mut config.amplitudes, || {
        Grid::new(1e-6, 1e-2, 25)
    });
    let sim = pick(None, &mut config.sim, SimConfig::default);
    sim.validate()?;
    let protocol = pick(args.protocol, &mut config.protocol, Protocol::default);
    Ok(SaturationSetup {
        r,
        order,
        delta,
        relative_amps: amps.log_values("amplitudes")?,
        sim,
        protocol,
    })
}

fn run_curve(
    model: EnvelopeModel,
    params: &DerivedParams,
    setup: &SaturationSetup,
    omega: f64,
    remax_grid: &Option<Grid>,
) -> anyhow::Result<SaturationCurve> {
    let drive = PumpDrive::new(setup.r, omega, setup.order)?;
    let pump = params.pump_input(setup.r);
    if pump <= 0.0 {
        bail!(invalid("r", "saturation needs r > 0"));
    }
    let amps: Vec<f64> = setup.relative_amps.iter().map(|a| a * pump).collect();
    let protocol = match setup.protocol {
        Protocol::Fixed => OmegaProtocol::Fixed,
        Protocol::Remaximize => {
            let grid = match remax_grid {
                Some(g) => checked_grid(*g, "omega")?,
                None => linspace(omega - 0.2 / params.q, omega + 0.2 / params.q, 9),
            };
            OmegaProtocol::Remaximize(grid)
        }
    };
    Ok(saturation_curve(
        model,
        params,
        &drive,
        &amps,
        setup.delta,
        &setup.sim,
        &protocol,
    )?)
}

fn curve_summary(c: &SaturationCurve, params: &DerivedParams) -> Value {
    json!({
        "model": c.model,
        "omega_rel": c.omega_rel,
        "r": c.r,
        "G0_db": c.g0_db,
        "linear_db": c.linear_db,
        "pump_input_sqrt_w0": c.pump_input,
        "pump_flux": c.pump_flux,
        "p1db_sqrt_w0": c.p1db,
        "p1db_flux": c.p1db.map(|a| params.photon_flux(a)),
        "p1db_rel_pump": c.p1db.map(|a| a / c.pump_input),
        "stiff_pump_marker_sqrt_w0": c.stiff_pump_marker,
        "stiff_pump_marker_flux": c.stiff_pump_marker.map(|a| params.photon_flux(a)),
        "unconverged_points": c.points.iter().filter(|p| !p.converged).count(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}"))
        .unwrap_or_else(|| "none".into())
}

pub fn saturation(args: SaturationArgs, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (_, params) = derived(config)?;
    let setup = saturation_setup(&args, config)?;
    let models = pick(args.models.clone(), &mut config.models, || {
        EnvelopeModel::ALL.to_vec()
    });
    if models.is_empty() {
        bail!(invalid("models", "empty"));
    }
    let omega = operating_omega(
        &params,
        setup.r,
        setup.order,
        setup.delta,
        args.omega_fixed,
        config,
    )?;
    let remax = if setup.protocol == Protocol::Remaximize {
        args.omega.or(config.omega)
    } else {
        None
    };
    if remax.is_some() {
        config.omega = remax;
    }

    let mut table = Table::new(&[
        "model",
        "a_in_sqrt_w0",
        "a_in_flux",
        "G_db",
        "converged",
        "step_used",
    ]);
    let mut summaries = Vec::new();
    let mut parts = Vec::new();
    for model in models {
        let c = run_curve(model, &params, &setup, omega, &remax)?;
        for p in &c.points {
            table.push(vec![
                model.name().into(),
                p.a_in_mag.into(),
                p.a_in_flux.into(),
                p.g_db.into(),
                p.converged.into(),
                p.step_used.into(),
            ]);
        }
        parts.push(format!(
            "{model} G0={:.4} dB p1db={}",
            c.g0_db,
            fmt_opt(c.p1db.map(|a| a / c.pump_input))
        ));
        summaries.push(curve_summary(&c, &params));
    }
    Ok(Report {
        command: "saturation",
        line: format!(
            "saturation at omega={omega:.6} (p1db relative to pump input): {}",
            parts.join("; ")
        ),
        summary: json!({ "curves": summaries }),
        table,
        meta: meta_derived(&params),
    })
}

pub fn dynrange(args: SaturationArgs, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (device, params) = derived(config)?;
    let setup = saturation_setup(&args, config)?;
    let model = match pick(args.models.clone(), &mut config.models, || {
        vec![EnvelopeModel::FullSine]
    })
    .as_slice()
    {
        [m] => *m,
        other => bail!(invalid(
            "models",
            format!("dynrange takes one model, got {}", other.len())
        )),
    };
    let ratios = pick(args.ratios.clone(), &mut config.ratios, || {
        vec![-1.0, -10.0, -100.0]
    });
    if ratios.is_empty() {
        bail!(invalid("ratios", "empty"));
    }
    // the operating frequency depends only on Q, r and the order
    let omega = operating_omega(
        &params,
        setup.r,
        setup.order,
        setup.delta,
        args.omega_fixed,
        config,
    )?;
    let remax = if setup.protocol == Protocol::Remaximize {
        args.omega.or(config.omega)
    } else {
        None
    };

    let mut table = Table::new(&[
        "ratio",
        "a_in_sqrt_w0",
        "a_in_flux",
        "G_db",
        "converged",
        "step_used",
    ]);
    let mut summaries = Vec::new();
    let mut parts = Vec::new();
    let mut derived_all = Vec::new();
    for &ratio in &ratios {
        let dev = DeviceParams::with_kerr_ratio(device.f0_hz, device.q, ratio)?;
        let p = dev.derive()?;
        derived_all.push(to_value(&p));
        let c = run_curve(model, &p, &setup, omega, &remax)?;
        for pt in &c.points {
            table.push(vec![
                ratio.into(),
                pt.a_in_mag.into(),
                pt.a_in_flux.into(),
                pt.g_db.into(),
                pt.converged.into(),
                pt.step_used.into(),
            ]);
        }
        parts.push(format!("ratio={ratio} p1db={}", fmt_opt(c.p1db)));
        let mut s = curve_summary(&c, &p);
        s["ratio"] = json!(ratio);
        s["ic_a"] = json!(dev.ic_a);
        summaries.push(s);
    }
    Ok(Report {
        command: "dynrange",
        line: format!(
            "dynrange ({model}, p1db in sqrt(omega0) units): {}",
            parts.join("; ")
        ),
        summary: json!({ "curves": summaries }),
        table,
        meta: vec![("derived".into(), Value::Array(derived_all))],
    })
}

pub fn oracle(args: OracleArgs, config: &mut RunConfig) -> anyhow::Result<Report> {
    let (_, params) = derived(config)?;
    let r = pick(args.r, &mut config.r, || 0.5);
    let grid = checked_grid(
        pick(args.omega, &mut config.omega, || Grid::new(0.95, 1.03, 81)),
        "omega",
    )?;
    let oracle_cfg = pick(None, &mut config.oracle, OracleConfig::default);
    let rep = compare_resonance_curves(&params, r, &grid, &oracle_cfg)?;
    let mut table = Table::new(&["omega_rel", "phi_a", "n_cl", "n_rwa", "rel_dev", "flags"]);
    for p in &rep.points {
        table.push(vec![
            p.omega_rel.into(),
            p.phi_a.into(),
            p.n_cl.into(),
            p.n_rwa.into(),
            p.rel_dev.into(),
            Cell::Text(p.flags.to_string()),
        ]);
    }
    Ok(Report {
        command: "oracle",
        line: format!(
            "oracle: i_p={} max_rel_dev={} at omega={} flagged={}",
            rep.i_p, rep.max_rel_dev, rep.worst_omega, rep.flagged
        ),
        summary: json!({
            "i_p": rep.i_p,
            "max_rel_dev": rep.max_rel_dev,
            "worst_omega": rep.worst_omega,
            "flagged": rep.flagged,
        }),
        table,
        meta: meta_derived(&params),
    })
}
