//! `preempt`: thresholds, equilibria and numerical checks for two-firm
//! investment timing games, read from a JSON model file.

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use preempt::sweep::{Grid, SweepSpec};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "preempt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Model file: {"model": <kind>, "params": {...}}.
    #[arg(long)]
    model: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Roots of the characteristic equation and all investment thresholds (JSON).
    Thresholds(Io),
    /// Leader, follower and joint values on a grid of states (CSV).
    Curves {
        #[command(flatten)]
        io: Io,
        /// States as lo:hi:n.
        #[arg(long)]
        grid: Grid,
    },
    /// Equilibrium regions and strategies (JSON).
    Classify(Io),
    /// Existence of a joint-investment equilibrium (JSON).
    Joint {
        #[command(flatten)]
        io: Io,
        /// Joint investment threshold; defaults to firm 1's joint threshold xM1.
        #[arg(long)]
        xj: Option<f64>,
    },
    /// Existence of a sequential-investment equilibrium (JSON).
    Seq(Io),
    /// Delayed-construction real-estate analysis (JSON).
    Grenadier(Io),
    /// One parameter varied over a grid (CSV).
    Sweep {
        #[command(flatten)]
        io: Io,
        /// Parameter and range as name=lo:hi:n.
        #[arg(long)]
        sweep: SweepSpec,
    },
    /// Lattice, deviation and Monte Carlo checks of the closed forms (JSON).
    Verify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        oracle: commands::OracleArgs,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Inapplicable(String),
    #[error("{0}")]
    Numerical(String),
}

impl From<preempt::Error> for CliError {
    fn from(e: preempt::Error) -> Self {
        use preempt::Error as E;
        match e {
            E::NotApplicable(_) | E::PremiseViolated(_) => CliError::Inapplicable(e.to_string()),
            E::NumericalFailure(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Rendered output and whether every check passed.
pub struct Output {
    pub text: String,
    pub passed: bool,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Output { text, passed: true }
    }
}

fn run(cli: Cli) -> Result<(Output, Option<PathBuf>), CliError> {
    use commands as c;
    let load = |io: &Io| c::load_model(&io.model);
    Ok(match cli.command {
        Command::Thresholds(io) => (c::thresholds(&load(&io)?)?, io.out),
        Command::Curves { io, grid } => (c::curves(&load(&io)?, &grid)?, io.out),
        Command::Classify(io) => (c::classify(&load(&io)?)?, io.out),
        Command::Joint { io, xj } => (c::joint(&load(&io)?, xj)?, io.out),
        Command::Seq(io) => (c::seq(&load(&io)?)?, io.out),
        Command::Grenadier(io) => (c::grenadier(&load(&io)?)?, io.out),
        Command::Sweep { io, sweep } => (c::sweep(&load(&io)?, &sweep)?, io.out),
        Command::Verify { io, oracle } => (c::verify(&load(&io)?, &oracle)?, io.out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, path) = match run(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                CliError::Input(_) => 2,
                CliError::Inapplicable(_) => 3,
                CliError::Numerical(_) => 1,
            });
        }
    };
    let written = match &path {
        Some(p) => std::fs::write(p, &out.text)
            .map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(out.text.as_bytes())
                .map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if out.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::from(1)
    }
}
