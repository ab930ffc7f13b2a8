mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use panda_core::entropy::{Basis, MAX_LP_VARS};
use panda_core::error::Error as CoreError;
use std::path::PathBuf;
use std::process::ExitCode;

/// Evaluate conjunctive queries and disjunctive rules under degree
/// constraints.
#[derive(Parser, Debug)]
#[command(name = "panda", version)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Basic measures spanning the Shannon cone: elemental or full.
    #[arg(long, global = true, env = "PANDA_BASIS", default_value = "elemental")]
    pub basis: Basis,
    /// Expand independent sub-problems on a thread pool.
    #[arg(long, global = true, env = "PANDA_PARALLEL")]
    pub parallel: bool,
    /// Print one line per engine node (rules only).
    #[arg(long, global = true, env = "PANDA_TRACE")]
    pub trace: bool,
    /// Reject programs with more variables than this.
    #[arg(long, global = true, env = "PANDA_MAX_VARS", default_value_t = MAX_LP_VARS)]
    pub max_vars: usize,
    /// Seed for `generate`.
    #[arg(long, global = true, env = "PANDA_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Query or rule file.
    pub query: PathBuf,
    /// Statistics file with `card` and `deg` lines.
    pub stats: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Polymatroid bound on the output size.
    Bound(Inputs),
    /// Integral Shannon witness of the bound.
    Witness(Inputs),
    /// Submodular width and the worst bag selection.
    Subw(Inputs),
    /// Fractional hypertree width and a decomposition attaining it.
    Fhtw(Inputs),
    /// Evaluate the program and write one CSV per output atom.
    Run {
        #[command(flatten)]
        inputs: Inputs,
        /// Directory holding `<relation>.csv`.
        #[arg(long, env = "PANDA_DATA")]
        data: PathBuf,
        /// Directory for result CSVs.
        #[arg(long, env = "PANDA_OUT")]
        out: PathBuf,
    },
    /// Check result CSVs against a naive evaluation.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, env = "PANDA_DATA")]
        data: PathBuf,
        /// Directory written by `run`.
        #[arg(long)]
        result: PathBuf,
    },
    /// Naive evaluation by a full join.
    Oracle {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, env = "PANDA_DATA")]
        data: PathBuf,
        #[arg(long, env = "PANDA_OUT")]
        out: PathBuf,
    },
    /// Write a random instance obeying the statistics.
    Generate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, env = "PANDA_OUT")]
        out: PathBuf,
        /// Rows wanted per relation.
        #[arg(long, default_value_t = 100)]
        tuples: usize,
        /// Values are drawn from `0..domain`.
        #[arg(long, default_value_t = 32)]
        domain: u32,
        /// Probability that a value is forced to 0.
        #[arg(long, default_value_t = 0.0)]
        skew: f64,
    },
}

/// Raised by `verify` when the result differs from the oracle.
#[derive(Debug)]
pub struct VerifyFailed(pub String);

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerifyFailed {}

/// 1 for bad input, 2 for data violating its statistics, 3 for internal
/// failures and failed verification.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerifyFailed>().is_some() {
        return 3;
    }
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::ConstraintViolated(_)) => 2,
        Some(
            CoreError::NoApplicableCase(_)
            | CoreError::InvariantViolated(_)
            | CoreError::InvalidWitness(_)
            | CoreError::EmptyOutputSet
            | CoreError::NonTerminalLeaf
            | CoreError::EmptyInput,
        ) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match commands::run(&cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
