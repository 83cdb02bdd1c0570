//! `lectern`: clean lecture transcripts, answer questions from a textbook
//! index, analyze a semester of lectures and report on it.
//!
//! Exit statuses: 0 success, 1 partial or processing failure, 2 usage or
//! input error, 3 a required service is unavailable.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::AppConfig;
use crate::exit::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "lectern",
    version,
    about = "Textbook-grounded answers and lecture transcript analysis"
)]
struct Cli {
    /// Configuration file (default: ./lectern.toml when present).
    #[arg(long, global = true, value_name = "PATH", help_heading = "Global options")]
    config: Option<PathBuf>,
    /// Inference server base URL; overrides the config file and LECTERN_LLM_URL.
    #[arg(long, global = true, value_name = "URL", help_heading = "Global options")]
    llm_url: Option<String>,
    /// Model name; overrides the config file and LECTERN_LLM_MODEL.
    #[arg(long, global = true, value_name = "NAME", help_heading = "Global options")]
    model: Option<String>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count, help_heading = "Global options")]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Remove hallucination loops from transcripts.
    Clean(commands::clean::Args),
    /// Answer questions from the textbook index.
    Query(commands::query::Args),
    /// Run the lecture analyses over a transcript directory.
    Analyze(commands::analyze::Args),
    /// Render transcript quality, ASR comparison and analysis digests.
    Report(commands::report::Args),
    /// Print a vocabulary prompt for speech recognition.
    Vocab(commands::vocab::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lectern: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = AppConfig::load(cli.config.as_deref(), cli.llm_url, cli.model)?;
    match cli.command {
        Command::Clean(a) => commands::clean::run(&a),
        Command::Query(a) => commands::query::run(&a, cfg),
        Command::Analyze(a) => commands::analyze::run(&a, cfg),
        Command::Report(a) => commands::report::run(&a, &cfg),
        Command::Vocab(a) => commands::vocab::run(&a, cfg),
    }
}
