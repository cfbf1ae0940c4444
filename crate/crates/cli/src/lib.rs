//! Command-line front end: config parsing, command dispatch and file output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Overrides;
use crate::config::{Format, LoadedConfig, ParamName, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "clustersync", version, about = "Fixed-time cluster synchronization: bounds and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration (defaults to the five-node example).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Prefix for output files.
    #[arg(long, global = true, value_name = "PREFIX")]
    pub output: Option<String>,
    /// Output formats (repeatable).
    #[arg(long, global = true, value_enum)]
    pub format: Vec<Format>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "REAL")]
    pub step: Option<f64>,
    #[arg(long = "t-end", global = true, value_name = "REAL")]
    pub t_end: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check matrix classes, partition and parameter domains.
    Validate,
    /// Compute the settling-time bound and gain thresholds.
    Bounds,
    /// Integrate the network and write the trajectory.
    Simulate,
    /// Re-run the simulation over a list of parameter values.
    Sweep {
        #[arg(long, value_enum)]
        param: Option<ParamName>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Option<Vec<f64>>,
    },
    /// Reproduce the five-node example and compare against the published constants.
    PaperExample,
    /// Print the effective configuration as JSON.
    Config,
}

fn load(cli: &Cli, overrides: &Overrides) -> Result<LoadedConfig, CliError> {
    let mut loaded = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => LoadedConfig {
            config: RunConfig::example(),
            base_dir: PathBuf::new(),
        },
    };
    overrides.apply(&mut loaded.config);
    Ok(loaded)
}

pub fn execute(cli: &Cli) -> Result<commands::CommandOutput, CliError> {
    let (param, values) = match &cli.command {
        Command::Sweep { param, values } => (*param, values.clone()),
        _ => (None, None),
    };
    let overrides = Overrides {
        output: cli.output.clone(),
        formats: cli.format.clone(),
        seed: cli.seed,
        step: cli.step,
        t_end: cli.t_end,
        param,
        values,
    };
    let loaded = load(cli, &overrides)?;
    match cli.command {
        Command::Validate => commands::cmd_validate(&loaded),
        Command::Bounds => commands::cmd_bounds(&loaded),
        Command::Simulate => commands::cmd_simulate(&loaded),
        Command::Sweep { .. } => commands::cmd_sweep(&loaded),
        Command::PaperExample => commands::cmd_reproduce(&loaded.config),
        Command::Config => Ok(commands::CommandOutput {
            stdout: loaded.config.to_json() + "\n",
            ..Default::default()
        }),
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            out.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
