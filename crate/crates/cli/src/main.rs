use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use srcid_cli::{execute, CliError, Driver, ExperimentConfig, VERSION};

#[derive(Parser)]
#[command(name = "srcid", version, about = "Bayesian identification of acoustic point sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment driver.
    Run {
        #[arg(value_enum)]
        driver: Driver,
        #[arg(long)]
        config: PathBuf,
        /// Overrides `run.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `run.out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config and list every violated constraint.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the version.
    Version,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            driver,
            config,
            seed,
            out,
            threads,
        } => {
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
            }
            let bytes = std::fs::read(&config).map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::load(&config)?;
            let seed = seed.unwrap_or(cfg.run.seed);
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.run.out)).join(driver.name());
            let manifest = execute(driver, &cfg, &bytes, seed, &out)?;
            for f in &manifest.files {
                println!("{}", out.join(&f.name).display());
            }
            for n in &manifest.notes {
                eprintln!("note: {n}");
            }
            Ok(())
        }
        Command::Validate { config } => {
            ExperimentConfig::load(&config)?;
            println!("{}: ok", config.display());
            Ok(())
        }
        Command::Version => {
            println!("srcid {VERSION}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
