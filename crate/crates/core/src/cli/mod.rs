//! The `qnslab` command line.
//!
//! Exit codes: 0 when every check passes, 1 when an assertion is violated,
//! 2 for invalid configuration or any other error.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
pub use commands::Fig4Variant;
use config::{Overrides, RunConfig, StudySettings};

#[derive(Debug, Parser)]
#[command(name = "qnslab", version, about = "Higher-order correlations of spin chains and their C/T/S symmetry constraints")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (required by `eval`, optional defaults for `table1` and `fig4`)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: results]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Pass/fail tolerance: zero and equality threshold of table1/fig4 [default: 1e-8],
    /// theorem tolerance of eval [default: 1e-9]
    #[arg(long, global = true, value_name = "TOL")]
    pub tolerance: Option<f64>,
    /// First grid point of the swept time [default: 2.05]
    #[arg(long, global = true, value_name = "T")]
    pub grid_start: Option<f64>,
    /// Last grid point of the swept time [default: 8]
    #[arg(long, global = true, value_name = "T")]
    pub grid_stop: Option<f64>,
    /// Grid spacing [default: 0.05]
    #[arg(long, global = true, value_name = "DT")]
    pub grid_step: Option<f64>,
    /// Inverse temperature of thermal states [default: 1]
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Number of spins in the chain [default: 8]
    #[arg(long = "n", global = true, value_name = "N")]
    pub sites: Option<usize>,
    /// Ising coupling λ [default: 1.5]
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Seed of the randomized route checks in eval [default: config value, else 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            tolerance: self.tolerance,
            grid_start: self.grid_start,
            grid_stop: self.grid_stop,
            grid_step: self.grid_step,
            beta: self.beta,
            sites: self.sites,
            coupling: self.lambda,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the C-symmetry selection rules of second- and third-order CTOCs
    /// for an anti-symmetric (collective σz) and a symmetric (σy on site 1) observable
    Table1,
    /// Third-order correlations of the Ising chain at t1 = 0, t2 = 2:
    /// `a` checks the CTOC zero pattern, `b` the time-reversal equality W:213 = W:21'3
    Fig4 {
        #[arg(value_enum)]
        variant: Fig4Variant,
        /// Add a T-breaking term to H (negative control for variant b; the check should fail)
        #[arg(long)]
        break_t_symmetry: bool,
    },
    /// Count the permutations of order n by contour rank (n ≤ 8)
    Ranks { order: usize },
    /// Evaluate correlations, symmetry checks and theorem checks from a JSON config
    Eval {
        /// Config file (alternative to --config)
        #[arg(value_name = "FILE")]
        file: Option<PathBuf>,
    },
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    let ov = cli.global.overrides();
    let config = cli.global.config.as_deref().map(config::load).transpose()?;
    match &cli.command {
        Command::Table1 => commands::table1(&StudySettings::resolve(config.as_ref(), &ov)?, out),
        Command::Fig4 { variant, break_t_symmetry } => {
            commands::fig4(*variant, *break_t_symmetry, &StudySettings::resolve(config.as_ref(), &ov)?, out)
        }
        Command::Ranks { order } => {
            let dir = ov.out.clone().unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUT));
            commands::ranks(*order, &dir, out)
        }
        Command::Eval { file } => {
            let config: RunConfig = match (file, config) {
                (Some(path), None) => config::load(path)?,
                (None, Some(c)) => c,
                (Some(_), Some(_)) => return Err(crate::error::Error::config("--config", "give the config either as argument or with --config")),
                (None, None) => return Err(crate::error::Error::config("--config", "eval needs a config file")),
            };
            commands::eval(&config.build(&ov)?, out)
        }
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(&cli, &mut out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            2
        }
    }
}
