use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser};
use kgmix::cli::{run, validate, ExperimentConfig, EXIT_INVALID};

/// Run one experiment from a TOML config and write CSV tables plus a
/// manifest.
#[derive(Debug, Parser)]
#[command(name = "kgmix", version)]
struct Args {
    /// Path to the TOML experiment config.
    config: PathBuf,
    /// Write artifacts here instead of the config's `output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sampling and evolution (all cores when absent).
    #[arg(long)]
    workers: Option<usize>,
    /// Only validate the config and print diagnostics.
    #[arg(long)]
    check: bool,
    /// Repeat for more detail (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count)]
    verbose: u8,
    /// Only print errors.
    #[arg(short, long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match (args.quiet, args.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let mut config = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    if let Some(dir) = args.output_dir {
        config.output_dir = dir;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let diags = validate(&config);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("invalid config: {d}");
        }
        return ExitCode::from(EXIT_INVALID as u8);
    }
    if args.check {
        return ExitCode::SUCCESS;
    }
    if let Some(n) = args.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    }
    match run(&config) {
        Ok(manifest) => {
            for c in &manifest.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            ExitCode::from(manifest.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID as u8)
        }
    }
}
