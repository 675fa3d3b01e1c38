//! `frontlab`: command-line front end.
//!
//! Every subcommand reads a JSON config, writes CSV/JSON results into the
//! output directory plus `provenance.json`, and exits with 0 on success,
//! 2 on invalid input and 3 on numerical failure.

mod commands;
mod config;
mod output;
mod sweep;

use clap::{Parser, Subcommand};
use config::{Invalid, RunConfig};
use output::{sha256_hex, OutDir, Provenance};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Environment variable holding the sweep worker count.
const WORKERS_ENV: &str = "FRONTLAB_WORKERS";

#[derive(Parser)]
#[command(name = "frontlab", version, about = "Stationary fronts of bi-stable reaction-diffusion systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config: a model descriptor, or {"model": ..., <sections>}
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Split the reaction into H and G and run the structural checks
    Decompose,
    /// Composite or refined stationary front profile
    Front,
    /// Super-slow front branches at the model's gamma
    Branches,
    /// Saddle-node of heteroclinic orbits
    Fold,
    /// Dispersion relation and essential-spectrum regime
    Spectrum,
    /// Evans function scans, winding counts and real zeros
    Evans,
    /// Discrete spectrum of the discretized linear operator
    Oracle,
    /// Time integration from the selected front
    Simulate,
    /// Type D/E destabilization of the regular branch
    Classify,
    /// Parallel parameter sweep of one analysis
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Front => "front",
            Command::Branches => "branches",
            Command::Fold => "fold",
            Command::Spectrum => "spectrum",
            Command::Evans => "evans",
            Command::Oracle => "oracle",
            Command::Simulate => "simulate",
            Command::Classify => "classify",
            Command::Sweep => "sweep",
        }
    }
}

/// 2 for bad input, 3 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<frontlab::Error>() {
            return if e.is_validation() { 2 } else { 3 };
        }
    }
    3
}

fn workers() -> anyhow::Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(config::invalid(format!("{WORKERS_ENV} must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn dispatch(command: Command, cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    match command {
        Command::Decompose => commands::decompose(cfg, out),
        Command::Front => commands::front(cfg, out),
        Command::Branches => commands::branches(cfg, out),
        Command::Fold => commands::fold(cfg, out),
        Command::Spectrum => commands::spectrum(cfg, out),
        Command::Evans => commands::evans_cmd(cfg, out),
        Command::Oracle => commands::oracle(cfg, out),
        Command::Simulate => commands::simulate_cmd(cfg, out),
        Command::Classify => commands::classify(cfg, out),
        Command::Sweep => sweep::sweep(cfg, out).map(|_| ()),
    }
}

fn run(cli: &Cli, started: Instant) -> anyhow::Result<()> {
    let path = cli.config.as_ref().ok_or_else(|| config::invalid("--config is required"))?;
    let (cfg, bytes) = RunConfig::load(path)?;
    let out = OutDir::create(&cli.out)?;
    let workers = workers()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let result = pool.install(|| dispatch(cli.command, &cfg, &out));
    let exit_code = result.as_ref().map_or_else(|e| i32::from(exit_code(e)), |_| 0);
    out.json(
        "provenance.json",
        &Provenance {
            command: cli.command.name(),
            config_path: path.display().to_string(),
            config_sha256: sha256_hex(&bytes),
            version: env!("CARGO_PKG_VERSION"),
            output_dir: cli.out.display().to_string(),
            deterministic: true,
            workers,
            wall_time_s: started.elapsed().as_secs_f64(),
            exit_code,
            config: &cfg,
        },
    )?;
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let started = Instant::now();
    let cli = Cli::parse();
    match run(&cli, started) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("frontlab {}: {e:#}", cli.command.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
