//! `mptensor`: polarizability tensors, frequency sweeps and regime
//! comparisons from a config file.
//!
//! Exit codes: 0 success, 1 some frequency or formula failed, 2 usage,
//! config or input error.

mod compare;
mod compute;
mod config;
mod plotdata;
mod sweep;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::RunConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] mptensor::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mptensor", version, about = "Polarizability tensors of small conducting objects")]
struct Cli {
    /// Run configuration (INI).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Frequencies processed concurrently (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the tensor bundle at every configured frequency.
    Tensors,
    /// Write the ℳ and ℬ sweep as CSV.
    Sweep,
    /// Evaluate H_Δ at the configured points under every regime formula.
    CompareRegimes,
    /// Cut (omega, value) series out of sweep CSVs.
    Plotdata {
        /// Column to extract; repeat for several.
        #[arg(long = "series", required = true)]
        series: Vec<String>,
        /// Sweep CSVs; several files are overlays on one omega grid.
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

/// Outcome of a command that can partly fail.
enum Done {
    Complete,
    Partial(usize),
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    RunConfig::load(path)
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_tensors(cfg: &RunConfig, out: &Path) -> Result<Done, CliError> {
    let results = sweep::compute_all(cfg);
    let several = results.len() > 1;
    let mut failed = 0;
    for (i, (omega, r)) in results.iter().enumerate() {
        match r {
            Ok(c) => {
                let name = if several {
                    format!("{}_{i:03}.txt", cfg.output.bundle)
                } else {
                    format!("{}.txt", cfg.output.bundle)
                };
                std::fs::write(out.join(&name), c.bundle.to_text())?;
                let d = c.bundle.m.diag();
                print!("ω = {omega:e} [{}] {name}: diag ℳ = {:.6e}, {:.6e}, {:.6e}", c.regime, d[0], d[1], d[2]);
                if let Some(o) = c.oracle {
                    let worst = d.iter().map(|m| (m - o).norm() / o.norm().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
                    print!("; sphere series {o:.6e} (rel. diff {worst:.2e})");
                }
                println!();
            }
            Err(e) => {
                failed += 1;
                eprintln!("ω = {omega:e}: {e}");
            }
        }
    }
    Ok(if failed == 0 { Done::Complete } else { Done::Partial(failed) })
}

fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Done, CliError> {
    let results = sweep::compute_all(cfg);
    let failed = sweep::write_csv(&results, out_file(out, &cfg.output.csv)?)?;
    println!("{} frequencies written to {}", results.len(), out.join(&cfg.output.csv).display());
    Ok(if failed == 0 { Done::Complete } else { Done::Partial(failed) })
}

fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<Done, CliError> {
    if cfg.compare.points.is_empty() {
        return Err(CliError::Config("[compare] needs 'points'".into()));
    }
    let reports = compare::compare_all(cfg);
    compare::write_entries(&reports, out_file(out, &format!("{}.csv", cfg.output.compare))?)?;
    compare::write_pairs(&reports, out_file(out, &format!("{}_pairs.csv", cfg.output.compare))?)?;
    print!("{}", compare::summary(&reports));
    let failed: usize = reports.iter().map(|r| r.failures()).sum();
    Ok(if failed == 0 { Done::Complete } else { Done::Partial(failed) })
}

fn run(cli: &Cli) -> Result<Done, CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
    }
    if let Command::Plotdata { series, csv } = &cli.command {
        std::fs::create_dir_all(&cli.out)?;
        for p in plotdata::plotdata(csv, series, &cli.out)? {
            println!("{}", p.display());
        }
        return Ok(Done::Complete);
    }
    let cfg = load(cli)?;
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Tensors => cmd_tensors(&cfg, &cli.out),
        Command::Sweep => cmd_sweep(&cfg, &cli.out),
        Command::CompareRegimes => cmd_compare(&cfg, &cli.out),
        Command::Plotdata { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(&cli) {
        Ok(Done::Complete) => ExitCode::SUCCESS,
        Ok(Done::Partial(n)) => {
            eprintln!("{n} item(s) failed; see the output for details");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
