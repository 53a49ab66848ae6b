//! Command-line front end.
//!
//! ```text
//! torsion-noise <simulate|analyze|model|plan|validate>
//!     [--config PATH] [--set section.key=value]... [--out DIR] [--seed N] [--workers N]
//! ```
//!
//! Exit status: 0 success, 1 invalid input or configuration, 2 I/O failure,
//! 3 a comparison or identity check failed.

pub mod commands;
pub mod config;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Outcome;
pub use config::RunConfig;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "torsion-noise", version, about = "Thermal noise of torsion pendulums")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate free or feedback-locked Brownian motion and write series files.
    Simulate(Common),
    /// Estimate PSD and autocorrelation of simulated series and compare to closed form.
    Analyze(Common),
    /// Evaluate a closed-form spectrum or autocorrelation on a grid.
    Model(Common),
    /// Feasibility report for a measurement plan.
    Plan(Common),
    /// Check the closed-form identities.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Scale every closed form by 1 + FAULT (for testing the checker).
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_fault: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration, or any output file whose header carries a configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Master seed (same as sim.seed).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Ensemble worker threads (same as sim.workers).
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
}

impl Common {
    /// Loads `--config`, then applies `--set`, `--seed` and `--workers` in that order.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for o in &self.overrides {
            cfg.set(o)?;
        }
        if let Some(seed) = self.seed {
            cfg.set(&format!("sim.seed={seed}"))?;
        }
        if let Some(w) = self.workers {
            cfg.set(&format!("sim.workers={w}"))?;
        }
        Ok(cfg)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Runs a parsed command, writing its summary to `stdout`.
pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> Result<i32> {
    let outcome = match &cli.command {
        Command::Simulate(c) => commands::simulate(&c.resolve()?, &c.out)?,
        Command::Analyze(c) => commands::analyze(&c.resolve()?, &c.out)?,
        Command::Model(c) => commands::model(&c.resolve()?, &c.out)?,
        Command::Plan(c) => commands::plan(&c.resolve()?, &c.out)?,
        Command::Validate { inject_fault, .. } => {
            let ids = validate::identity_suite(*inject_fault)?;
            Outcome {
                files: Vec::new(),
                passed: ids.iter().all(validate::Identity::passed),
                summary: validate::render(&ids),
            }
        }
    };
    let _ = stdout.write_all(outcome.summary.as_bytes());
    for f in &outcome.files {
        let _ = writeln!(stdout, "wrote {}", f.display());
    }
    Ok(if outcome.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

/// Entry point of the binary: parses `args`, runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
