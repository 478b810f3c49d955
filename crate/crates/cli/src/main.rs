//! `extremis`: ingest subreddit data, score it and build report bundles.

mod bundle;
mod commands;
mod config;
mod error;
mod hashing;
mod lock;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "extremis", version, about = "Extremism scoring for subreddit discussions")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// JSONL submission store.
    #[arg(long, global = true, value_name = "PATH")]
    pub store: Option<PathBuf>,
    /// Output directory for scored data and reports.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Replay recorded API responses from this directory instead of polling.
    #[arg(long, global = true, value_name = "DIR")]
    pub fixtures: Option<PathBuf>,
    /// Population for the normalisation means: corpus or subreddit.
    #[arg(long, global = true, value_name = "SCOPE")]
    pub means_scope: Option<String>,
    /// Moving-average window in days.
    #[arg(long, global = true, value_name = "N")]
    pub ma_window: Option<usize>,
    /// Score stage to analyse (repeatable): a, abs_p, s, inv_s, chi,
    /// chi_norm, chi_l, chi_lu.
    #[arg(long, global = true, value_name = "NAME")]
    pub selector: Vec<String>,
    /// Report 1 - s instead of s.
    #[arg(long, global = true)]
    pub invert_subjectivity: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Poll (or replay) top posts and comments and merge them into the store.
    Ingest {
        /// Replay only this fixture date (YYYY-MM-DD).
        #[arg(long)]
        date: Option<chrono::NaiveDate>,
    },
    /// Score the filtered store and write scored.csv plus its sidecar.
    Score,
    /// Build the report bundle from scored.csv.
    Report,
    /// Score a labelled CSV (text,subreddit,label) and tabulate per-label means.
    Validate {
        /// Labelled CSV file.
        labeled: PathBuf,
    },
    /// Export word frequencies and Jaccard overlap of top-scoring corpora.
    Corpus,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(&cli.global)?;
    match cli.command {
        Command::Ingest { date } => commands::ingest(&cfg, date),
        Command::Score => commands::score(&cfg),
        Command::Report => report::report(&cfg),
        Command::Validate { labeled } => commands::validate(&cfg, &labeled),
        Command::Corpus => report::corpus(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
