mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vcycle::ErrorClass;

use config::{split_overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] vcycle::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Precondition => 2,
                ErrorClass::Numerical => 3,
            },
        }
    }
}

/// Local algebras, zero-integral form reduction, level sets, Newton
/// potentials and local injectivity certificates for polynomial deformations.
///
/// Any config leaf can be overridden with `--path.to.key=value`, e.g.
/// `--grid.h=0.02` or `--lambda=-1`.
#[derive(Parser, Debug)]
#[command(name = "vcycle", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (same as `--output_dir=...`).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Milnor number, monomial basis and versal deformation (basis.json).
    Algebra,
    /// Reduce `reduce.form` times `(F / l_mu)^k` to the monomial basis (reduction.json).
    Reduce,
    /// Extract, nest and orient the level set (mesh.obj, levelset.json).
    Levelset,
    /// Volume and surface-charge potentials and moments (potential.csv, mesh.obj, moments.json).
    Potential,
    /// Moment or potential Jacobian with its rank certificate (jacobian.json).
    Jacobian,
    /// Recover the parameters from their own moments (recovery.json).
    Recover,
    /// End-to-end injectivity certificate and separation experiment.
    Verify,
    /// Print the resolved configuration.
    Config,
}

fn run() -> Result<u8, CliError> {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not failures.
            let _ = e.print();
            return Ok(if e.use_stderr() { 1 } else { commands::OK });
        }
    };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    if let Some(dir) = cli.out {
        cfg.output_dir = dir;
    }
    match cli.command {
        Command::Algebra => commands::algebra(&cfg),
        Command::Reduce => commands::reduce(&cfg),
        Command::Levelset => commands::levelset(&cfg),
        Command::Potential => commands::potential(&cfg),
        Command::Jacobian => commands::jacobian(&cfg),
        Command::Recover => commands::recover(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Config => {
            println!("{}", serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Usage(e.to_string()))?);
            Ok(commands::OK)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
