//! `mobo`: configure, run, resume and inspect loss-weight optimisation runs.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

const PARETO_HELP: &str = "\
CSV schema (--csv):
  header: iteration,<weight names...>,<objective names...>
  one row per non-dominated observation, sorted by the first objective descending
  (raw units). Column count is 1 + d + M. Weight and objective names come from the
  config (--config, or the config recorded in <archive>.manifest.json); without one
  they are w1..wd and o1..oM.

Corrupt archive lines are reported on stderr with their line number. Valid records
are still processed and the exit code is 2.";

const REPORT_HELP: &str = "\
CSV schema (stdout):
  iteration,phase,eval_seconds,fit_seconds,propose_seconds,cumulative_eval_seconds,
  cumulative_model_seconds,front_size,hypervolume
  one row per observation in archive order. cumulative_model_seconds is the running sum
  of fit + propose time. hypervolume is measured in the maximise-all orientation against
  one reference point computed from the whole archive, so the column never decreases.
  The reference point is printed on stderr.

Corrupt archive lines are reported on stderr with their line number. Valid records
are still processed and the exit code is 2.";

#[derive(Parser)]
#[command(name = "mobo", version, about = "Multi-objective Bayesian optimisation of loss weights")]
#[command(after_help = "Log verbosity is controlled by RUST_LOG (for example RUST_LOG=debug).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a commented default configuration.
    Init {
        #[arg(default_value = "mobo.toml")]
        path: PathBuf,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Start a run. The archive must not exist or be empty.
    Run(RunArgs),
    /// Continue a run from its archive.
    Resume(RunArgs),
    /// List the non-dominated observations of an archive.
    #[command(after_help = PARETO_HELP)]
    Pareto {
        #[arg(long)]
        archive: PathBuf,
        /// Config used for column names and objective orientation labels.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print CSV instead of a table.
        #[arg(long)]
        csv: bool,
    },
    /// Per-iteration timing and hypervolume trace as CSV.
    #[command(after_help = REPORT_HELP)]
    Report {
        #[arg(long)]
        archive: PathBuf,
        /// Config supplying the reference slack and warm-start settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the analytic validation suite and print one PASS/FAIL line per check.
    Bench,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, default_value = "mobo.toml")]
    config: PathBuf,
    #[arg(long, default_value = "archive.ndjson")]
    archive: PathBuf,
    /// Stop once the archive holds this many observations.
    #[arg(long)]
    max_observations: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Init { path, force } => commands::init(&path, force),
        Command::Run(a) => commands::run(&a.config, &a.archive, a.max_observations, false),
        Command::Resume(a) => commands::run(&a.config, &a.archive, a.max_observations, true),
        Command::Pareto { archive, config, csv } => {
            commands::pareto(&archive, config.as_deref(), csv)
        }
        Command::Report { archive, config } => commands::report(&archive, config.as_deref()),
        Command::Bench => bench::run(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
