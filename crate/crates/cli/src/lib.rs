//! Configuration, experiment drivers and file outputs for `srcid`.

pub mod config;
pub mod drivers;
pub mod error;
pub mod output;

use std::path::Path;

use clap::ValueEnum;

pub use config::ExperimentConfig;
pub use error::CliError;
use output::{Manifest, OutputSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The experiment drivers the binary can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Driver {
    /// Heat maps, MAP estimates and the source-count posterior of one run.
    Separation,
    /// Monte Carlo error of the functionals against particle count.
    Mse,
    /// Hellinger distance to a fine-mesh posterior against mesh size.
    Hellinger,
    /// Discretization error of the functionals against mesh size.
    Eh,
    /// Repeated separation runs with fresh noise.
    Experiment2,
}

impl Driver {
    pub fn name(self) -> &'static str {
        match self {
            Driver::Separation => "separation",
            Driver::Mse => "mse",
            Driver::Hellinger => "hellinger",
            Driver::Eh => "eh",
            Driver::Experiment2 => "experiment2",
        }
    }
}

fn wrap(driver: Driver) -> impl FnOnce(CliError) -> CliError {
    move |e| match e {
        e @ CliError::Invalid(_) => e,
        e => CliError::Driver {
            driver: driver.name(),
            source: Box::new(e),
        },
    }
}

/// Runs a driver and renders its files without touching the disk.
pub fn render(driver: Driver, config: &ExperimentConfig, seed: u64) -> Result<OutputSet, CliError> {
    let run = || -> Result<OutputSet, CliError> {
        Ok(match driver {
            Driver::Separation => drivers::separation(config, seed)?.outputs(),
            Driver::Mse => drivers::mse(config, seed)?.outputs(),
            Driver::Hellinger => drivers::mesh_study(config, seed)?.hellinger_outputs(),
            Driver::Eh => drivers::mesh_study(config, seed)?.eh_outputs(),
            Driver::Experiment2 => drivers::experiment2(config, seed)?.outputs(),
        })
    };
    run().map_err(wrap(driver))
}

/// Runs a driver and writes its files plus `manifest.json` into `out`.
pub fn execute(driver: Driver, config: &ExperimentConfig, config_bytes: &[u8], seed: u64, out: &Path) -> Result<Manifest, CliError> {
    let outputs = render(driver, config, seed)?;
    let manifest = Manifest::new(driver.name(), seed, config_bytes, &outputs);
    output::write_outputs(out, &outputs, &manifest)?;
    Ok(manifest)
}
