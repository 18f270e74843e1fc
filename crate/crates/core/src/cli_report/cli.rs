//! Command-line parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::catalog;
use crate::error::{Error, Result};
use crate::ifs_core::export_system;

use super::commands::{
    cmd_measure, cmd_operators, cmd_reconstruct, cmd_report, cmd_verify, EXIT_CONFIG, EXIT_FAILURE,
};
use super::config::{FileConfig, Overrides, RunConfig};
use super::suites::is_config_error;

#[derive(Debug, Parser)]
#[command(
    name = "ifs-lab",
    version,
    about = "Checks for iterated function systems and their operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every verification suite; exit 0 iff all checks pass.
    Verify(RunArgs),
    /// Write exact, fixed-point and chaos-game cell masses.
    Measure(RunArgs),
    /// Write residuals of the operator identities per depth.
    Operators(RunArgs),
    /// Write the reconstruction experiment table.
    Reconstruct(RunArgs),
    /// measure, operators, reconstruct and verify.
    Report(RunArgs),
    /// Print a catalog system as a definition file.
    Export {
        #[arg(long)]
        system: String,
    },
    /// List the catalog systems.
    List,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Catalog name or path to a system definition file.
    #[arg(long)]
    system: Option<String>,
    /// TOML run configuration; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Depth range, e.g. 2..5.
    #[arg(long)]
    depths: Option<String>,
    /// Chaos-game sample count.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random symbols or trial vectors per check.
    #[arg(long)]
    trials: Option<usize>,
    /// Margin between the symbol support and the branch value set.
    #[arg(long)]
    delta: Option<f64>,
    /// Symbol support as lo:hi per axis, e.g. 0.1:0.4,0.1:0.4.
    #[arg(long)]
    symbol_support: Option<String>,
    /// Tolerance override key=value (repeatable).
    #[arg(long = "tol")]
    tolerances: Vec<String>,
    /// Do not assume measure separation (refuses exact masses).
    #[arg(long)]
    no_separation: bool,
    /// Run independent suites concurrently.
    #[arg(long)]
    parallel: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let file = self.config.as_deref().map(FileConfig::load).transpose()?;
        let flags = Overrides {
            system: self.system.clone(),
            depths: self.depths.clone(),
            samples: self.samples,
            seed: self.seed,
            out: self.out.clone(),
            trials: self.trials,
            delta: self.delta,
            symbol_support: self.symbol_support.clone(),
            no_separation: self.no_separation,
            parallel: self.parallel,
            tolerances: self.tolerances.clone(),
        };
        RunConfig::resolve(file, &flags)
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Verify(a) => Ok(cmd_verify(&a.resolve()?)?.0),
        Command::Measure(a) => cmd_measure(&a.resolve()?),
        Command::Operators(a) => cmd_operators(&a.resolve()?),
        Command::Reconstruct(a) => cmd_reconstruct(&a.resolve()?),
        Command::Report(a) => cmd_report(&a.resolve()?),
        Command::Export { system } => {
            print!("{}", export_system(&catalog::lookup(&system)?.system)?);
            Ok(0)
        }
        Command::List => {
            for name in catalog::names() {
                println!("{name}");
            }
            Ok(0)
        }
    }
}

fn status_of(e: &Error) -> i32 {
    if is_config_error(e) {
        EXIT_CONFIG
    } else {
        EXIT_FAILURE
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            status_of(&e)
        }
    }
}
