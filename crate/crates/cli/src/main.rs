use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::{Format, RunConfig, SEED_CONFIG};
use error::CliError;

type Handler = fn(&RunConfig, Format) -> Result<commands::Outcome, CliError>;

/// Exact time kernels for quantum time-of-arrival operators.
#[derive(Parser)]
#[command(name = "supratoa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the graded kernel table and check its boundary conditions.
    Kernel(Common),
    /// Compare the classical limit of the transformed kernel with the local series.
    ClassicalLimit(Common),
    /// Commutator residual of the kernel on two bump functions.
    Commutator(Common),
    /// Compare the Weyl-quantized local series with the classical kernel term.
    WeylCompare(Common),
    /// Write kernel or arrival-time values on a grid.
    Grid(Common),
    /// Local series against quadrature at one phase point.
    Toa(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file. Defaults to `output_path` from the config, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print a commented sample config and exit.
    #[arg(long)]
    seed_config: bool,
}

fn write_out(path: Option<&PathBuf>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<bool, CliError> {
    let (common, cmd): (Common, Handler) = match command {
        Command::Kernel(c) => (c, commands::kernel),
        Command::ClassicalLimit(c) => (c, commands::classical_limit_cmd),
        Command::Commutator(c) => (c, commands::commutator),
        Command::WeylCompare(c) => (c, commands::weyl_compare),
        Command::Grid(c) => (c, commands::grid),
        Command::Toa(c) => (c, commands::toa),
    };
    if common.seed_config {
        write_out(common.out.as_ref(), SEED_CONFIG)?;
        return Ok(true);
    }
    let path = common
        .config
        .ok_or_else(|| CliError::Usage("--config FILE is required".into()))?;
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let cfg = RunConfig::parse(&text)?;
    let format = common.format.or(cfg.output_format).unwrap_or(Format::Json);
    let outcome = cmd(&cfg, format)?;
    write_out(common.out.as_ref().or(cfg.output_path.as_ref()), &outcome.body)?;
    eprint!("{}", outcome.summary);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
