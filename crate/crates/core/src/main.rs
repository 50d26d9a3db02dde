use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kuramoto_wave::harness::acceptance::{self, AcceptanceOptions, Suite};
use kuramoto_wave::harness::commands;
use kuramoto_wave::harness::config::{Config, ExperimentConfig};
use kuramoto_wave::harness::manifest::ExperimentManifest;
use kuramoto_wave::Error;

/// Disordered stochastic Kuramoto model: stationary profiles, linear
/// stability, disorder-induced drift, particle and PDE simulation.
#[derive(Parser)]
#[command(name = "kuramoto-wave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (key = value with [section] headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding [simulation] seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding [output] out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synchronized profile and its order parameter.
    Stationary(Common),
    /// Spectrum of the linearized operator and derived constants.
    Spectrum(Common),
    /// Drift of the center of synchronization for a fluctuation vector.
    Drift(Common),
    /// Particle simulation with phase tracking and wave speed.
    Simulate(Common),
    /// Fokker-Planck evolution and decay toward the circle of profiles.
    Pde(Common),
    /// Small-disorder expansion table.
    Expand(Common),
    /// Data behind fig1, fig2 or fig3.
    Reproduce {
        figure: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Acceptance suite: fast (deterministic) or full.
    Acceptance {
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

fn load(common: &Common) -> Result<(Config, PathBuf), Error> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set("simulation", "seed", &seed.to_string());
    }
    let out = match &common.out {
        Some(dir) => dir.clone(),
        None => PathBuf::from(ExperimentConfig::from_config(&cfg)?.out_dir),
    };
    Ok((cfg, out))
}

fn run_with(common: &Common, f: fn(&Config, &Path) -> kuramoto_wave::Result<ExperimentManifest>) -> Result<(), Error> {
    let (cfg, out) = load(common)?;
    let manifest = f(&cfg, &out)?;
    report(&manifest);
    Ok(())
}

fn report(manifest: &ExperimentManifest) {
    for (k, v) in &manifest.constants {
        println!("{} = {}", k, v);
    }
    println!("wrote {} files", manifest.outputs.len() + 1);
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {}", err);
    match err {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => ExitCode::from(EXIT_USAGE),
        _ => ExitCode::from(EXIT_NUMERICAL),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Stationary(c) => run_with(c, commands::run_stationary),
        Command::Spectrum(c) => run_with(c, commands::run_spectrum),
        Command::Drift(c) => run_with(c, commands::run_drift),
        Command::Simulate(c) => run_with(c, commands::run_simulate),
        Command::Pde(c) => run_with(c, commands::run_pde),
        Command::Expand(c) => run_with(c, commands::run_expand),
        Command::Reproduce { figure, seed, out } => {
            commands::run_reproduce(figure, *seed, out).map(|m| report(&m))
        }
        Command::Acceptance { suite, seed, out } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return exit_for(&e),
            };
            let mut opts = AcceptanceOptions::default();
            if let Some(s) = seed {
                opts.seed = *s;
            }
            let results = acceptance::run_suite(suite, &opts);
            for r in &results {
                println!("{}", r);
            }
            let written = std::fs::create_dir_all(out)
                .map_err(Error::from)
                .and_then(|_| std::fs::File::create(out.join("verdicts.csv")).map_err(Error::from))
                .and_then(|f| acceptance::write_verdicts(&results, f));
            if let Err(e) = written {
                return exit_for(&e);
            }
            if results.iter().any(|r| !r.passed) {
                return ExitCode::from(EXIT_ACCEPTANCE);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
