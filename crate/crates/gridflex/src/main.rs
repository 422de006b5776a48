use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use gridflex::compare::compare_dirs;
use gridflex::error::{Error, Result};
use gridflex::output::Staging;
use gridflex::pipeline::{Overrides, Pipeline};

/// Market, carbon, reliability and price studies of large flexible loads.
#[derive(Parser)]
#[command(name = "gridflex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the manifest seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of Monte-Carlo trials.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Result directory. Written as `<dir>.partial` and renamed on success.
    #[arg(long, global = true, default_value = "gridflex-out")]
    out_dir: PathBuf,
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate inputs and write the normalized case, profiles and county telemetry.
    Ingest { manifest: PathBuf },
    /// Resolve the mining sites and capacities.
    Deploy { manifest: PathBuf },
    /// Clear the day-ahead and real-time markets with and without mining.
    Dispatch { manifest: PathBuf },
    /// Emissions attributed to the mining load.
    Carbon { manifest: PathBuf },
    /// Monte-Carlo adequacy indices.
    Reliability { manifest: PathBuf },
    /// County prices, price statistics and load/price correlations.
    Market { manifest: PathBuf },
    /// Everything above, subject to the manifest's analysis switches.
    Run { manifest: PathBuf },
    /// Per-metric differences between two result directories.
    Compare { base: PathBuf, variant: PathBuf },
}

fn study(manifest: &Path, overrides: &Overrides, out: &Staging, command: &Command) -> Result<()> {
    let mut p = Pipeline::open(manifest, overrides)?;
    p.write_manifest(out)?;
    match command {
        Command::Ingest { .. } => p.write_ingest(out)?,
        Command::Deploy { .. } => p.write_deployment(out)?,
        Command::Dispatch { .. } => p.write_dispatch(out)?,
        Command::Carbon { .. } => p.write_carbon(out)?,
        Command::Reliability { .. } => p.write_reliability(out)?,
        Command::Market { .. } => p.write_market(out)?,
        Command::Run { .. } => {
            p.write_ingest(out)?;
            p.write_deployment(out)?;
            p.write_dispatch(out)?;
            let analyses = p.manifest.analyses.clone();
            if analyses.carbon {
                p.write_carbon(out)?;
            }
            if analyses.reliability {
                p.write_reliability(out)?;
            }
            if analyses.market {
                p.write_market(out)?;
            }
        }
        Command::Compare { .. } => unreachable!("handled by the caller"),
    }
    p.write_run_record(out)
}

fn execute(cli: &Cli) -> Result<PathBuf> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::input("--threads", e))?;
    }
    let overrides = Overrides { seed: cli.seed, trials: cli.trials };
    let out = Staging::begin(&cli.out_dir)?;
    match &cli.command {
        Command::Compare { base, variant } => out.write("deltas.csv", &compare_dirs(base, variant)?)?,
        Command::Ingest { manifest }
        | Command::Deploy { manifest }
        | Command::Dispatch { manifest }
        | Command::Carbon { manifest }
        | Command::Reliability { manifest }
        | Command::Market { manifest }
        | Command::Run { manifest } => study(manifest, &overrides, &out, &cli.command)?,
    }
    out.commit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, _) => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match execute(&cli) {
        Ok(dir) => {
            log::info!("results in {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
