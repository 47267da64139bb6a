//! `fdenvelope`: simulations, envelope curves, coverage runs, FDP-level
//! selection and the HTTP server from the command line.
//!
//! Exit status is 0 on success, 2 when arguments, configuration or input data
//! are invalid, and 1 for any other failure.

mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fdenvelope_core::Method;

#[derive(Parser)]
#[command(name = "fdenvelope", version, about = "False discovery envelopes for discrete heterogeneous tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw simulated data sets and write per-replicate and median curves.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Output directory for curves.csv, medians.csv and config.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Envelope curves of a stored p-value family.
    Envelopes {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_method, required = true)]
        methods: Vec<Method>,
        #[arg(long)]
        alpha: f64,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo frequency of bounds that undercount the true nulls.
    Coverage {
        #[command(flatten)]
        sim: SimArgs,
        /// Use full-null binomial tests with these trial counts, cycled over hypotheses.
        #[arg(long, value_delimiter = ',')]
        trials: Option<Vec<u64>>,
        /// JSON report destination; a table is printed either way.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest p-value prefix whose FDP bound is at most `gamma`.
    Select {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        gamma: f64,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Keep uploaded datasets in this directory across restarts.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long, default_value_t = fdenvelope_service::DEFAULT_MAX_M)]
        max_m: usize,
    },
}

/// Simulation settings. Flags override values read from `--config`.
#[derive(Args, Default)]
struct SimArgs {
    /// JSON file with a full or partial simulation configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    /// Subjects per group.
    #[arg(long)]
    subjects: Option<u64>,
    #[arg(long)]
    pi0: Option<f64>,
    #[arg(long)]
    pi0prime: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    /// Family as JSON, or as CSV with columns pvalue, cdf_id and optional label.
    #[arg(long)]
    input: PathBuf,
    /// JSON map from cdf id to cdf, for CSV input.
    #[arg(long)]
    cdfs: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.trim().parse().map_err(|e: fdenvelope_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
