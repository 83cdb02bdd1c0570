use std::fs;
use std::path::{Path, PathBuf};

use lectern::analysis::{load_run_report, RUN_REPORT_FILE};
use lectern::report::{compare_corpora, parse_term_list, render_reports};
use lectern::transcript::{clean_transcript, corpus_stats, read_transcript, CorpusStats, Transcript, TranscriptFormat};

use super::input_files;
use crate::config::AppConfig;
use crate::exit::{CliError, CliResult, OK, USAGE};

const USAGE_TEXT: &str = "usage: lectern report [--stats DIR] [--compare DIR [--with DIR] [--terms FILE]] \
[--analysis DIR] [--json] [--out DIR]
at least one of --stats, --compare or --analysis is required";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Transcript quality table for the transcripts in DIR.
    #[arg(long, value_name = "DIR")]
    stats: Option<PathBuf>,
    /// Compare the transcripts in DIR against a second set.
    #[arg(long, value_name = "DIR")]
    compare: Option<PathBuf>,
    /// The second set for --compare (default: the --stats directory, then `transcript_dir`).
    #[arg(long, value_name = "DIR", requires = "compare")]
    with: Option<PathBuf>,
    /// Terms to count in both sets, one per line.
    #[arg(long, value_name = "FILE", requires = "compare")]
    terms: Option<PathBuf>,
    /// Digest of the analysis run stored in DIR.
    #[arg(long, value_name = "DIR")]
    analysis: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Also write report.txt and report.json into DIR.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

pub fn run(args: &Args, cfg: &AppConfig) -> CliResult {
    if args.stats.is_none() && args.compare.is_none() && args.analysis.is_none() {
        eprintln!("{USAGE_TEXT}");
        return Ok(USAGE);
    }
    let stats = args.stats.as_deref().map(quality_stats).transpose()?;
    let comparison = match &args.compare {
        Some(dir_a) => {
            let dir_b = args
                .with
                .as_ref()
                .or(args.stats.as_ref())
                .or(cfg.transcript_dir.as_ref())
                .ok_or_else(|| CliError::usage("--compare needs --with DIR (or --stats, or transcript_dir)"))?;
            let terms = match &args.terms {
                Some(p) => parse_term_list(
                    &fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
                ),
                None => Vec::new(),
            };
            let a = load_dir(dir_a)?;
            let b = load_dir(dir_b)?;
            let report = compare_corpora(&a, &b, &terms, (&label(dir_a), &label(dir_b))).map_err(CliError::usage)?;
            Some(report)
        }
        None => None,
    };
    let analyses = match &args.analysis {
        Some(dir) => Some(load_run_report(&dir.join(RUN_REPORT_FILE)).map_err(CliError::usage)?),
        None => None,
    };

    let rendered = render_reports(stats.as_ref(), comparison.as_ref(), analyses.as_ref());
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&rendered.json).expect("json values serialize")
        );
    } else {
        print!("{}", rendered.text);
    }
    if let Some(dir) = &args.out {
        rendered
            .write_to(dir)
            .map_err(|e| CliError::failure(format!("{}: {e}", dir.display())))?;
    }
    Ok(OK)
}

fn load_dir(dir: &Path) -> Result<Vec<Transcript>, CliError> {
    input_files(dir)?
        .iter()
        .map(|p| {
            read_transcript(p, TranscriptFormat::from_path(p))
                .map(|(t, _)| t)
                .map_err(CliError::usage)
        })
        .collect()
}

/// Quality totals for a directory of raw or cleaned transcripts. Cleaned
/// files carry the report from their cleaning run; raw ones are cleaned here.
fn quality_stats(dir: &Path) -> Result<CorpusStats, CliError> {
    let mut transcripts = Vec::new();
    let mut reports = Vec::new();
    for path in input_files(dir)? {
        let (t, stored) = read_transcript(&path, TranscriptFormat::from_path(&path)).map_err(CliError::usage)?;
        let mut report = stored.unwrap_or_else(|| clean_transcript(&t).1);
        if report.lecture_id.is_empty() {
            report.lecture_id = t.lecture_id.clone();
        }
        transcripts.push(t);
        reports.push(report);
    }
    corpus_stats(&transcripts, &reports).map_err(CliError::usage)
}

fn label(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}
