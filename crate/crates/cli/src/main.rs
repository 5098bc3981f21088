//! `zeno-steer`: run steering scenarios, query bounds and phase sums, and run the acceptance suite.

mod commands;
mod format;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "zeno-steer", version, about = "Zeno-effect steering of open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact and sampled success probabilities of measurement steering, with the bound.
    SteerMeasure {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated, strictly ascending step counts.
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<u64>,
        /// Monte Carlo trajectories per step count (omit to skip sampling).
        #[arg(long)]
        traj: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pulse steering study with convergence fits.
    SteerPulse {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measurement rate needed for a target failure probability.
    Bounds {
        #[arg(long)]
        delta: f64,
        #[arg(long = "k-norm")]
        k_norm: f64,
        #[arg(long = "h-norm")]
        h_norm: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Weighted phase sums `sum f(n/N) e^{i n phi}` over `n < N`.
    Ergodic {
        #[arg(long)]
        phi: f64,
        /// Power `k` in `f(x) = x^k`.
        #[arg(long, conflicts_with = "fn_name", required_unless_present = "fn_name")]
        k: Option<u32>,
        /// Named weight: one, x, x2, x3, exp, sin3x, exp*sin3x.
        #[arg(long = "fn")]
        fn_name: Option<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<u64>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every acceptance criterion and print a table.
    Verify {
        /// Directory of measurement scenarios replacing the built-in corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Leading constant of the bound formula, for mutation testing.
        #[arg(long, hide = true, default_value_t = 4.0)]
        epsilon_prefactor: f64,
    },
}

/// Failures mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// Usage, I/O or validation problem: exit 1.
    Input(anyhow::Error),
    /// A scientific invariant or acceptance criterion failed: exit 2.
    Invariant(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let argv: Vec<String> = std::env::args().collect();
    let outcome = match cli.command {
        Command::SteerMeasure { scenario, steps, traj, seed, out } => {
            commands::steer_measure(&argv, &scenario, &steps, traj, seed, &out)
        }
        Command::SteerPulse { scenario, steps, out } => commands::steer_pulse(&argv, &scenario, &steps, &out),
        Command::Bounds { delta, k_norm, h_norm, tau } => commands::bounds(delta, k_norm, h_norm, tau),
        Command::Ergodic { phi, k, fn_name, steps, out } => {
            commands::ergodic(&argv, phi, k, fn_name.as_deref(), &steps, out.as_deref())
        }
        Command::Verify { corpus, epsilon_prefactor } => commands::verify(corpus.as_deref(), epsilon_prefactor),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(2)
        }
    }
}
