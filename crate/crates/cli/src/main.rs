use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delaysgd::asynchrony::Architecture;
use delaysgd_cli::commands::{self, Outcome};
use delaysgd_cli::{load_spec, CliError};

/// Simulate delayed (stochastic) gradient descent and check its assumptions.
#[derive(Parser)]
#[command(name = "delaysgd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of a spec and write CSV and JSON outputs.
    Run {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override `run.master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Override `run.replications`.
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Grid check of variational coherence on the spec's feasible set.
    CheckVc { spec: PathBuf },
    /// Pairing verdict and summability sums for the spec's schedule and delays.
    CheckCompat { spec: PathBuf },
    /// Structural check of a trace CSV.
    ValidateTrace {
        file: PathBuf,
        #[arg(long, default_value = "master_worker")]
        arch: Architecture,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Re-run replication 0 of a spec on a recorded trace.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        spec: PathBuf,
        /// Also write the replayed series as CSV into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cmd: Command) -> Result<Outcome, CliError> {
    let (text, outcome) = match cmd {
        Command::Run {
            spec,
            out,
            seed,
            replications,
        } => {
            let mut spec = load_spec(&spec)?;
            if let Some(s) = seed {
                spec.master_seed = s;
            }
            if let Some(r) = replications {
                if r == 0 {
                    return Err(CliError::Usage("--replications must be at least 1".into()));
                }
                spec.replications = r;
            }
            let (summary, outcome) = commands::run(&spec, &out)?;
            (commands::run_report(&summary, &out), outcome)
        }
        Command::CheckVc { spec } => commands::check_vc(&load_spec(&spec)?)?,
        Command::CheckCompat { spec } => commands::check_compat(&load_spec(&spec)?)?,
        Command::ValidateTrace { file, arch, workers } => commands::validate_trace_file(&file, arch, workers)?,
        Command::Replay { trace, spec, out } => commands::replay(&load_spec(&spec)?, &trace, out.as_deref())?,
    };
    // A closed pipe (`| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
