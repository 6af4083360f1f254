//! `pdd`: scan tabular datasets for personal data, evaluate predictions and
//! compare detectors.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 scan finished but
//! at least one column failed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdd_core::eval::ReportFormat;
use pdd_core::rules::ScanStrategy;

use config::DetectorKind;

#[derive(Debug, Parser)]
#[command(name = "pdd", version, about = "Personal data detection in tabular datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify every column of a dataset and write predictions.
    Scan(ScanArgs),
    /// Score predictions against ground-truth labels.
    Eval(EvalArgs),
    /// Print the conversation the llm detector would send for one column.
    Prompt(PromptArgs),
    /// Render metrics files as a comparison table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Dataset CSV with a header row.
    data: PathBuf,
    /// Metadata JSON with title and description [default: <data stem>.meta.json if present].
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, value_enum)]
    detector: Option<DetectorKind>,
    /// Most frequent values shown to the llm detector per column [default: 10].
    #[arg(long)]
    values_per_column: Option<usize>,
    /// Minimum hits for an entity kind to count [default: 3].
    #[arg(long)]
    min_hits: Option<usize>,
    /// Minimum recognizer confidence for a hit [default: 0.4].
    #[arg(long)]
    min_conf: Option<f64>,
    /// columnwise or rowwise [default: columnwise].
    #[arg(long)]
    strategy: Option<ScanStrategy>,
    /// Chat completion endpoint URL.
    #[arg(long, conflicts_with = "mock")]
    endpoint: Option<String>,
    /// Model identifier sent to the endpoint [default: gpt-4o].
    #[arg(long)]
    model: Option<String>,
    /// Sampling seed passed to the endpoint.
    #[arg(long)]
    seed: Option<i64>,
    /// Scripted replies per column instead of a live endpoint.
    #[arg(long)]
    mock: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV field delimiter [default: ,].
    #[arg(long)]
    delimiter: Option<char>,
    /// TOML config file with [scan], [rules] and [llm] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Predictions output; run details go to a sibling .run.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    preds: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Dataset name in the report [default: from the run file, else the predictions file name].
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Debug, Args)]
struct PromptArgs {
    data: PathBuf,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    column: String,
    #[arg(long, default_value_t = pdd_core::corpus::DEFAULT_SAMPLE_SIZE)]
    values_per_column: usize,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(required = true)]
    metrics: Vec<PathBuf>,
    /// markdown or json.
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Scan(a) => commands::scan(a),
        Command::Eval(a) => commands::eval(a).map(|()| ExitCode::SUCCESS),
        Command::Prompt(a) => commands::prompt(a).map(|()| ExitCode::SUCCESS),
        Command::Report(a) => commands::report(a).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
