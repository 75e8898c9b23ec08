//! `spade-resolve`: reproducible scans of crosstalk-affected SPADE versus
//! direct imaging.

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::Resolver;
use crate::output::{write_table, Format};

#[derive(Debug, Parser)]
#[command(name = "spade-resolve", version, about)]
struct Cli {
    /// Flat `key = value` config file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SPADE_RESOLVE_WORKERS")]
    workers: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Averaged SPADE, direct imaging and ideal Fisher information versus x.
    FisherScan(FisherArgs),
    /// Minimal resolvable distance of SPADE and direct imaging over nu and N.
    MrdScan(MrdArgs),
    /// Measured crosstalk strength versus mu.
    CrosstalkStats(StatsArgs),
    /// k = x/sqrt(p_c) needed to reach a fraction of the maximal information.
    OptimalRegion(RegionArgs),
    /// Threshold points where SPADE overtakes direct imaging.
    ThresholdScan(ThresholdArgs),
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub pc: Option<f64>,
    #[arg(long = "dim")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MrdArgs {
    /// Explicit comma-separated nu values (overrides the nu grid).
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    #[arg(long)]
    pub nu_min: Option<f64>,
    #[arg(long)]
    pub nu_max: Option<f64>,
    #[arg(long)]
    pub nu_points: Option<usize>,
    /// Comma-separated photon numbers.
    #[arg(long, value_delimiter = ',')]
    pub photons: Option<Vec<f64>>,
    #[arg(long)]
    pub pc: Option<f64>,
    #[arg(long = "dim")]
    pub dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Solve per matrix and average d_min instead of averaging F.
    #[arg(long)]
    pub per_matrix: bool,
    /// Replace the SPADE curve by the ideal constant w^2 F = 1.
    #[arg(long)]
    pub ideal: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Explicit comma-separated mu values (overrides the mu grid).
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    #[arg(long)]
    pub mu_min: Option<f64>,
    #[arg(long)]
    pub mu_max: Option<f64>,
    #[arg(long)]
    pub mu_points: Option<usize>,
    #[arg(long = "dim")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, value_delimiter = ',')]
    pub pc: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub fraction: Option<Vec<f64>>,
    /// k at which the reached fraction is reported.
    #[arg(long)]
    pub k_probe: Option<f64>,
    /// Fixed nu; by default nu is drawn uniformly from [0.5, 1].
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long = "dim")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Use identity crosstalk (debug mode).
    #[arg(long)]
    pub identity: bool,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub pc: Option<Vec<f64>>,
    /// `lo,hi`: draw mu = exp(r), r uniform in [ln lo, ln hi], per matrix.
    #[arg(long, value_delimiter = ',')]
    pub mu_interval: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long = "dim")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub scan_points: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("spade-resolve: usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("spade-resolve: computation failed: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let usage = Failure::Usage;
    let mut r = Resolver::from_file(cli.config.as_deref()).map_err(usage)?;
    let seed = r.value("seed", cli.seed, 12345u64).map_err(usage)?;
    let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let workers = r.value("workers", cli.workers, default_workers).map_err(usage)?;
    let format = r.value("format", cli.format, Format::Csv).map_err(usage)?;
    let out = r.optional_path("out", cli.out).map_err(usage)?;
    if workers == 0 {
        return Err(Failure::Usage(anyhow::anyhow!("--workers must be at least 1")));
    }

    let (name, job) = match &cli.command {
        Command::FisherScan(a) => ("fisher-scan", commands::resolve_fisher(a, &mut r, seed)),
        Command::MrdScan(a) => ("mrd-scan", commands::resolve_mrd(a, &mut r, seed)),
        Command::CrosstalkStats(a) => ("crosstalk-stats", commands::resolve_stats(a, &mut r, seed)),
        Command::OptimalRegion(a) => ("optimal-region", commands::resolve_region(a, &mut r, seed)),
        Command::ThresholdScan(a) => {
            ("threshold-scan", commands::resolve_threshold(a, &mut r, seed))
        }
    };
    let job = job.map_err(usage)?;
    let resolved = r.finish().map_err(usage)?;

    let table = commands::execute(&job, workers).map_err(Failure::Compute)?;

    let mut meta = vec![
        ("artifact".to_string(), format!("spade-resolve {}", env!("CARGO_PKG_VERSION"))),
        ("command".to_string(), name.to_string()),
    ];
    // Worker count and destination never change the numbers.
    meta.extend(resolved.into_iter().filter(|(k, _)| k != "workers" && k != "out"));

    let write = |w: &mut dyn Write| write_table(w, format, &meta, &table);
    match out {
        Some(path) => {
            let file = File::create(&path)
                .map_err(|e| Failure::Compute(anyhow::anyhow!("creating {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w).map_err(Failure::Compute)?;
            w.flush().map_err(|e| Failure::Compute(e.into()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(Failure::Compute)?;
        }
    }
    Ok(())
}
