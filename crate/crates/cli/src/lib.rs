//! The `jpa` command-line tool.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failure.
//! Errors are reported on stderr as a JSON object.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use jpa_core::saturation::EnvelopeModel;
use jpa_core::{JpaError, Order};
use serde_json::json;

use commands::{LingainArgs, MatchArgs, OracleArgs, SaturationArgs, StabilityArgs, SteadyArgs};
use config::{load_device, Format, Grid, Protocol, RunConfig, TargetSpec};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "jpa",
    version,
    about = "Josephson parametric amplifier studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Device JSON file: {"f0_hz": .., "ic_a": .., "q": ..}
    #[arg(long, global = true)]
    device: Option<PathBuf>,
    /// Run configuration JSON; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Worker threads (default: JPA_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pump steady states and S11 over a pump-frequency grid.
    Steady {
        #[arg(long)]
        r: Option<f64>,
        /// Pump-frequency grid `lo,hi,points`.
        #[arg(long)]
        omega: Option<Grid>,
        #[arg(long, alias = "orders", value_delimiter = ',')]
        order: Option<Vec<Order>>,
        #[command(flatten)]
        common: Common,
    },
    /// Number of steady states over an (omega, r) grid.
    Stability {
        #[arg(long)]
        omega: Option<Grid>,
        #[arg(long)]
        r_grid: Option<Grid>,
        #[arg(long, alias = "orders", value_delimiter = ',')]
        order: Option<Vec<Order>>,
        #[command(flatten)]
        common: Common,
    },
    /// Locate the onset of bistability.
    Cusp {
        #[arg(long, alias = "orders", value_delimiter = ',')]
        order: Option<Vec<Order>>,
        #[command(flatten)]
        common: Common,
    },
    /// Small-signal gain versus pump frequency.
    Lingain {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, alias = "orders", value_delimiter = ',')]
        order: Option<Vec<Order>>,
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<f64>>,
        #[arg(long)]
        omega: Option<Grid>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Pump strength giving a target maximum gain.
    MatchPower {
        /// Reference point, e.g. `order=1,r=0.99`.
        #[arg(long, conflicts_with = "target_db")]
        target_from: Option<TargetSpec>,
        #[arg(long)]
        target_db: Option<f64>,
        #[arg(long, alias = "orders", value_delimiter = ',')]
        order: Option<Vec<Order>>,
        #[arg(long)]
        omega: Option<Grid>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Gain versus signal input amplitude from the envelope models.
    Saturation {
        #[command(flatten)]
        sat: SatFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Saturation curves for several Kerr-to-linewidth ratios.
    Dynrange {
        /// Values of omega0 / (K Q), e.g. `-1,-10,-100`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ratios: Option<Vec<f64>>,
        #[command(flatten)]
        sat: SatFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the steady state with the full phase equation.
    Oracle {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        omega: Option<Grid>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct SatFlags {
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<EnvelopeModel>>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, alias = "orders", value_delimiter = ',')]
    order: Option<Vec<Order>>,
    /// Fixed pump frequency (default: small-signal gain maximum).
    #[arg(long)]
    omega_fixed: Option<f64>,
    /// Grid for re-maximizing the pump frequency.
    #[arg(long)]
    omega: Option<Grid>,
    /// Input amplitudes relative to the pump input, log-spaced `lo,hi,points`.
    #[arg(long)]
    amplitudes: Option<Grid>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    protocol: Option<Protocol>,
}

impl SatFlags {
    fn into_args(self, ratios: Option<Vec<f64>>) -> SaturationArgs {
        SaturationArgs {
            models: self.models,
            r: self.r,
            orders: self.order,
            omega_fixed: self.omega_fixed,
            omega: self.omega,
            amplitudes: self.amplitudes,
            delta: self.delta,
            protocol: self.protocol,
            ratios,
        }
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<JpaError>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let code = exit_code(err);
    let mut body = json!({
        "kind": if code == EXIT_NUMERICAL { "numerical" } else { "input" },
        "exit_code": code,
        // core errors already spell out their cause
        "message": match err.downcast_ref::<JpaError>() {
            Some(e) => e.to_string(),
            None => format!("{err:#}"),
        },
    });
    if let Some(JpaError::AtCell { omega_rel, r, .. }) = err.downcast_ref::<JpaError>() {
        body["omega_rel"] = json!(omega_rel);
        body["r"] = json!(r);
    }
    json!({ "error": body })
}

fn prepare(common: Common) -> anyhow::Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &common.device {
        config.device = Some(load_device(path)?);
    }
    if let Some(device) = &config.device {
        device.validate()?;
    }
    if common.output.is_some() {
        config.output = common.output;
    }
    if common.format.is_some() {
        config.format = common.format;
    }
    if common.threads.is_some() {
        config.threads = common.threads;
    }
    Ok(config)
}

fn thread_count(config: &RunConfig) -> anyhow::Result<usize> {
    if let Some(n) = config.threads {
        return Ok(n);
    }
    match std::env::var("JPA_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| config::invalid("JPA_THREADS", format!("not a thread count: {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<()> {
    type Job = Box<dyn FnOnce(&mut RunConfig) -> anyhow::Result<output::Report> + Send>;
    let (common, run): (Common, Job) = match command {
        Command::Steady {
            r,
            omega,
            order,
            common,
        } => (
            common,
            Box::new(move |c| {
                commands::steady(
                    SteadyArgs {
                        r,
                        omega,
                        orders: order,
                    },
                    c,
                )
            }),
        ),
        Command::Stability {
            omega,
            r_grid,
            order,
            common,
        } => (
            common,
            Box::new(move |c| {
                commands::stability(
                    StabilityArgs {
                        omega,
                        r_grid,
                        orders: order,
                    },
                    c,
                )
            }),
        ),
        Command::Cusp { order, common } => (common, Box::new(move |c| commands::cusp(order, c))),
        Command::Lingain {
            r,
            order,
            q,
            omega,
            delta,
            common,
        } => (
            common,
            Box::new(move |c| {
                commands::lingain(
                    LingainArgs {
                        r,
                        orders: order,
                        q,
                        omega,
                        delta,
                    },
                    c,
                )
            }),
        ),
        Command::MatchPower {
            target_from,
            target_db,
            order,
            omega,
            delta,
            common,
        } => (
            common,
            Box::new(move |c| {
                commands::match_power(
                    MatchArgs {
                        target_from,
                        target_db,
                        orders: order,
                        omega,
                        delta,
                    },
                    c,
                )
            }),
        ),
        Command::Saturation { sat, common } => (
            common,
            Box::new(move |c| commands::saturation(sat.into_args(None), c)),
        ),
        Command::Dynrange {
            ratios,
            sat,
            common,
        } => (
            common,
            Box::new(move |c| commands::dynrange(sat.into_args(ratios), c)),
        ),
        Command::Oracle { r, omega, common } => (
            common,
            Box::new(move |c| commands::oracle(OracleArgs { r, omega }, c)),
        ),
    };

    let mut config = prepare(common)?;
    let threads = thread_count(&config)?;
    // thread count never changes results, so keep it out of the recorded config
    config.threads = None;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    let report = pool.install(|| run(&mut config))?;

    let is_cusp = report.command == "cusp";
    if is_cusp {
        writeln!(stdout, "{}", report.line)?;
        if config.output.is_some() {
            output::emit(&report, &config, stdout)?;
        }
        return Ok(());
    }
    output::emit(&report, &config, stdout)?;
    if config.output.is_some() {
        writeln!(stdout, "{}", report.line)?;
    } else {
        writeln!(stderr, "{}", report.line)?;
    }
    Ok(())
}

/// Runs the tool with explicit streams; returns the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "{}", error_json(&err));
            exit_code(&err)
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
