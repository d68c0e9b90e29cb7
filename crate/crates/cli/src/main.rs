//! Command-line pipeline: solve the 2-D flow, pump the initial data,
//! lift to 3-D, and certify the construction.
//!
//! Exit codes are a stable contract: 0 on success / all checks passing,
//! 1 when certification fails, 2 for usage and configuration errors.

mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config_file, parse_xi, Overrides, RawConfig, RunConfig};

#[derive(Parser)]
#[command(name = "subsol", version)]
#[command(about = "Construct and certify dissipative symmetry-breaking Euler subsolutions")]
struct Cli {
    /// Key=value configuration file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Grid points per axis (even, >= 8).
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Time step of the 2-D solver.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Final time of the 2-D run.
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,

    /// Profile bracket height; defaults to epsilon^2/2.
    #[arg(long, global = true)]
    eta: Option<f64>,

    /// Initial-data closeness target; defaults to sqrt(2 eta).
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Initial-condition mode file (`k1 k2 re im` per line).
    #[arg(long, global = true)]
    ic: Option<PathBuf>,

    /// Steps between snapshots.
    #[arg(long, global = true)]
    stride: Option<usize>,

    /// Fill in missing conjugate modes of the initial data.
    #[arg(long, global = true)]
    complete_conjugates: bool,

    /// Pump oscillation frequency.
    #[arg(long, global = true)]
    pump_n_osc: Option<u32>,

    /// Pump direction as `k1,k2`.
    #[arg(long, global = true, value_name = "K1,K2")]
    pump_xi: Option<String>,

    /// Pump temporal cutoff width.
    #[arg(long, global = true)]
    pump_t0: Option<f64>,

    /// Override a check tolerance, repeatable.
    #[arg(long = "tolerance", global = true, value_name = "CHECK=VALUE")]
    tolerances: Vec<String>,

    /// Dump the pointwise strictness margin fields during certify.
    #[arg(long, global = true)]
    dump_margins: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the smooth 2-D evolution and write (v, u, q) snapshots.
    Solve2d,
    /// Pump the initial data and measure saturation defects.
    Pump,
    /// Lift the planar triplets to the 3-D torus.
    Lift,
    /// Run all six certification checks and write report.json.
    Certify,
    /// Evaluate the energy budget chain on the sampled times.
    Budget,
    /// Pretty-print an existing report.
    Report {
        /// Report path (default `<out>/report.json`).
        path: Option<PathBuf>,
    },
}

fn overrides_from_cli(cli: &Cli) -> Result<Overrides, String> {
    let mut tolerances = Vec::new();
    for raw in &cli.tolerances {
        let Some((name, value)) = raw.split_once('=') else {
            return Err(format!("--tolerance expects CHECK=VALUE, got {raw:?}"));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| format!("--tolerance {name}: cannot parse {value:?}"))?;
        tolerances.push((name.trim().to_string(), value));
    }
    let pump_xi = match &cli.pump_xi {
        Some(raw) => Some(parse_xi(raw)?),
        None => None,
    };
    Ok(Overrides {
        n: cli.n,
        dt: cli.dt,
        t_end: cli.t_end,
        eta: cli.eta,
        epsilon: cli.epsilon,
        ic: cli.ic.clone(),
        out: cli.out.clone(),
        stride: cli.stride,
        complete_conjugates: cli.complete_conjugates,
        pump_n_osc: cli.pump_n_osc,
        pump_xi,
        pump_t0: cli.pump_t0,
        tolerances,
    })
}

fn resolve_config(cli: &Cli, with_run_cfg: bool) -> Result<RunConfig, String> {
    let over = overrides_from_cli(cli)?;
    let mut sources: Vec<RawConfig> = Vec::new();
    if with_run_cfg {
        // out dir comes from the flag/config layer first so we know where
        // to look for run.cfg
        let probe = RunConfig::resolve(
            &match &cli.config {
                Some(path) => vec![parse_config_file(path)?],
                None => vec![],
            },
            &over,
        )?;
        sources.push(RunConfig::load_resolved(&probe.out)?);
    }
    if let Some(path) = &cli.config {
        sources.push(parse_config_file(path)?);
    }
    RunConfig::resolve(&sources, &over)
}

fn run(cli: &Cli) -> Result<i32, String> {
    match &cli.command {
        Command::Solve2d => {
            let cfg = resolve_config(cli, false)?;
            stages::solve2d(&cfg)
        }
        Command::Pump => {
            let cfg = resolve_config(cli, true)?;
            stages::pump(&cfg)
        }
        Command::Lift => {
            let cfg = resolve_config(cli, true)?;
            stages::lift_stage(&cfg)
        }
        Command::Certify => {
            let cfg = resolve_config(cli, true)?;
            stages::certify(&cfg, cli.dump_margins)
        }
        Command::Budget => {
            let cfg = resolve_config(cli, true)?;
            stages::budget(&cfg)
        }
        Command::Report { path } => {
            let path = match path {
                Some(p) => p.clone(),
                None => resolve_config(cli, true)?.out.join("report.json"),
            };
            stages::report(&path)
        }
    }
}

fn main() -> ExitCode {
    // die quietly when a pipe consumer (head, less) closes stdout early
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
