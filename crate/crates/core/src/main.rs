use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use clifford_hull::experiment::output::{emit, RunMetadata};
use clifford_hull::experiment::{run, ExperimentConfig, Format, Mode};
use clifford_hull::{Error, Result};

#[derive(Parser)]
#[command(name = "clifford-hull", version, about = "Convex hulls of Poisson processes on the Clifford torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate hulls at one rate and emit one record per trial.
    Simulate(Flags),
    /// Check the cap-bound statistic on random caps.
    Caps(Flags),
    /// Estimate the measure functions and fit their growth law.
    MeasureFit(Flags),
    /// Cross-validate the integral formulas against simulation.
    Integrals(Flags),
    /// Regress mean valence on log10 of the expected point count.
    Regress(Flags),
    /// Compare the analytic Jacobian with finite differences.
    JacobianCheck(Flags),
}

/// Flags override the fields of the `--config` document.
#[derive(Args)]
struct Flags {
    /// JSON configuration document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Worker threads; all cores when absent.
    #[arg(long, env = "CLIFFORD_HULL_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        _ => Err(format!("unknown format {s:?}: expected csv or json")),
    }
}

fn config(mode: Mode, f: Flags) -> Result<ExperimentConfig> {
    let mut cfg = match &f.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if cfg.mode.is_some_and(|m| m != mode) {
        return Err(Error::Config(format!("config file mode does not match subcommand {}", mode.name())));
    }
    cfg.mode = Some(mode);
    if let Some(l) = f.lambdas {
        cfg.lambdas = Some(l);
        cfg.lambda = None;
    } else if let Some(l) = f.lambda {
        cfg.lambda = Some(l);
        cfg.lambdas = None;
    }
    cfg.master_seed = f.seed.unwrap_or(cfg.master_seed);
    cfg.output = f.out.or(cfg.output);
    cfg.format = f.format.unwrap_or(cfg.format);
    cfg.threads = f.threads.or(cfg.threads);
    cfg.trials = f.trials.or(cfg.trials);
    cfg.samples = f.samples.or(cfg.samples);
    cfg.t_min = f.tmin.or(cfg.t_min);
    cfg.t_max = f.tmax.or(cfg.t_max);
    cfg.bins = f.bins.or(cfg.bins);
    cfg.tol = f.tol.or(cfg.tol);
    Ok(cfg)
}

fn execute(mode: Mode, flags: Flags) -> Result<()> {
    let cfg = config(mode, flags)?;
    let resolved = cfg.resolve()?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let report = run(&resolved)?;
    let meta = RunMetadata {
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        version: env!("CARGO_PKG_VERSION"),
    };
    emit(&resolved, &report, cfg.output.as_deref(), &meta)
}

fn main() -> ExitCode {
    // usage errors are config errors (status 1); 2 is reserved for invariants
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (mode, flags) = match cli.command {
        Command::Simulate(f) => (Mode::Simulate, f),
        Command::Caps(f) => (Mode::Caps, f),
        Command::MeasureFit(f) => (Mode::MeasureFit, f),
        Command::Integrals(f) => (Mode::Integrals, f),
        Command::Regress(f) => (Mode::Regress, f),
        Command::JacobianCheck(f) => (Mode::JacobianCheck, f),
    };
    match execute(mode, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
