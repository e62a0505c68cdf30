//! `abelian` — command-line front-end for the avalanche-size distribution
//! library.
//!
//! Subcommands: `pmf` (tabulate the mass function), `sample` (seeded draws),
//! `fit` (maximum-likelihood estimation from a file of observed sizes),
//! `critical` (critical-coupling analysis), and `check` (exact-arithmetic
//! identity suite).
//!
//! Exit status contract: 0 success, 1 identity-check failure, 2 argument
//! error, 3 data error. Tabular output is CSV preceded by `#`-prefixed
//! metadata comments; structured reports are JSON objects with `metadata`
//! and `report` members. Identical invocations produce byte-identical
//! payloads (the metadata timestamp is the only run-dependent output), and
//! every float is printed with full round-trip precision.

mod commands;
mod meta;

use std::fmt;
use std::path::PathBuf;
use std::process;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use abelian::sampling::SampleMethod;

/// Error carrying the process exit status; the message goes to stderr.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or flag values (exit 2).
    Usage(String),
    /// Unreadable or invalid input data (exit 3).
    Data(String),
    /// An exact identity failed; the witness is already on stderr (exit 1).
    CheckFailed,
    /// Output could not be written (exit 3).
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
            CliError::CheckFailed => f.write_str("identity check failed"),
            CliError::Io(err) => write!(f, "cannot write output: {err}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

#[derive(Parser)]
#[command(
    name = "abelian",
    version,
    about = "Avalanche-size distribution toolkit: evaluate, sample, fit, and analyse criticality",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Sampling strategy selector (mirrors the library's methods).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Binary search of the cumulative table.
    InverseCdf,
    /// Walker-Vose alias table (default; O(1) per draw).
    AliasTable,
}

impl From<MethodArg> for SampleMethod {
    fn from(arg: MethodArg) -> Self {
        match arg {
            MethodArg::InverseCdf => SampleMethod::InverseCdf,
            MethodArg::AliasTable => SampleMethod::AliasTable,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the mass function as CSV (L,pmf), one row per support point.
    Pmf {
        /// Coupling parameter, strictly inside (0, 1).
        #[arg(long)]
        alpha: f64,
        /// System size (number of units), at least 1.
        #[arg(long)]
        n: u64,
        /// Emit base-10 log-log columns (log10_L,log10_pmf) instead.
        #[arg(long = "log-log")]
        log_log: bool,
    },
    /// Draw seeded avalanche sizes, one decimal integer per line.
    Sample {
        /// Coupling parameter, strictly inside (0, 1). Optional when --n 1,
        /// where every draw is 1 regardless of the coupling.
        #[arg(long)]
        alpha: Option<f64>,
        /// System size (number of units), at least 1.
        #[arg(long)]
        n: u64,
        /// Number of draws to emit (0 emits metadata only).
        #[arg(long)]
        count: u64,
        /// Seed for the deterministic generator.
        #[arg(long)]
        seed: u64,
        /// Sampling strategy.
        #[arg(long, value_enum, default_value_t = MethodArg::AliasTable)]
        method: MethodArg,
    },
    /// Maximum-likelihood fit of the coupling (and optionally the system
    /// size) from a file of observed sizes; prints a JSON report.
    #[command(group(ArgGroup::new("system").required(true).args(["n", "n_range"])))]
    Fit {
        /// Input file: newline-delimited decimal sizes, or CSV with a
        /// `size,count` header. Lines starting with `#` are ignored.
        #[arg(long)]
        input: PathBuf,
        /// Fix the system size and fit the coupling alone.
        #[arg(long)]
        n: Option<u64>,
        /// Fit the system size too, scanning the inclusive grid LO:HI.
        #[arg(long = "n-range", value_name = "LO:HI")]
        n_range: Option<String>,
        /// Convergence tolerance on the coupling.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Critical-coupling analysis: JSON report for one system size, or a
    /// CSV scaling table across several.
    #[command(group(ArgGroup::new("target").required(true).args(["n", "scaling"])))]
    Critical {
        /// System size to analyse (requires N >= 2).
        #[arg(long)]
        n: Option<u64>,
        /// Comma-separated system sizes for the scaling table.
        #[arg(long, value_delimiter = ',', value_name = "N1,N2,...")]
        scaling: Option<Vec<u64>>,
        /// Bisection tolerance on the critical coupling.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Coupling grid step for the curvature-region scan.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Verify the exact combinatorial identities behind the distribution;
    /// exits 0 only if every instance holds.
    Check {
        /// Largest expansion order for the coefficient laws.
        #[arg(long = "max-i", default_value_t = 8)]
        max_i: u32,
        /// Largest system size on the grid.
        #[arg(long = "max-n", default_value_t = 12)]
        max_n: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Pmf { alpha, n, log_log } => commands::pmf(alpha, n, log_log),
        Command::Sample {
            alpha,
            n,
            count,
            seed,
            method,
        } => commands::sample(alpha, n, count, seed, method.into()),
        Command::Fit {
            input,
            n,
            n_range,
            tol,
        } => commands::fit(&input, n, n_range.as_deref(), tol),
        Command::Critical {
            n,
            scaling,
            tol,
            step,
        } => commands::critical(n, scaling.as_deref(), tol, step),
        Command::Check { max_i, max_n } => commands::check(max_i, max_n),
    }
}

fn main() {
    // Clap reports its own parse errors on stderr and exits with status 2.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            if !matches!(err, CliError::CheckFailed) {
                eprintln!("error: {err}");
            }
            process::exit(err.exit_code());
        }
    }
}
