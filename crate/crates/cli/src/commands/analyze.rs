use std::path::PathBuf;

use lectern::analysis::{analyze_corpus, AnalysisKind, AnalysisOptions, ItemStatus, DEFAULT_DEDUP_WINDOW_S};
use lectern::llm::{HttpGateway, LanguageModel};
use lectern::transcript::{read_transcript, TranscriptFormat};

use super::input_files;
use crate::config::{required, AppConfig};
use crate::exit::{CliError, CliResult, FAILURE, OK};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Cleaned transcripts; overrides `transcript_dir`.
    #[arg(long = "in", value_name = "DIR")]
    input: Option<PathBuf>,
    /// Output directory; overrides `analysis_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated subset of summary,questions,confusion,anecdotes.
    #[arg(long, value_name = "LIST", value_parser = parse_kinds)]
    kinds: Option<Kinds>,
    /// Confusion records on the same topic closer than this merge (seconds).
    #[arg(long, value_name = "SECONDS", default_value_t = DEFAULT_DEDUP_WINDOW_S)]
    dedup_window: f64,
    /// Lectures analyzed at once; defaults to the gateway's `lanes`.
    #[arg(long)]
    lanes: Option<usize>,
}

/// Parsed `--kinds`; wrapped so clap treats the list as one value.
#[derive(Debug, Clone)]
struct Kinds(Vec<AnalysisKind>);

fn parse_kinds(list: &str) -> Result<Kinds, String> {
    AnalysisKind::parse_list(list).map(Kinds)
}

pub fn run(args: &Args, cfg: AppConfig) -> CliResult {
    let input = match &args.input {
        Some(p) => p.clone(),
        None => required(&cfg.transcript_dir, "transcript_dir", "--in")?.to_path_buf(),
    };
    let out = match &args.out {
        Some(p) => p.clone(),
        None => required(&cfg.analysis_dir, "analysis_dir", "--out")?.to_path_buf(),
    };
    if args.dedup_window.is_nan() || args.dedup_window < 0.0 {
        return Err(CliError::usage("--dedup-window must be >= 0"));
    }
    let lanes = args.lanes.unwrap_or(cfg.gateway.lanes);
    if lanes == 0 {
        return Err(CliError::usage("--lanes must be at least 1"));
    }
    cfg.gateway.validate_for_analysis().map_err(CliError::usage)?;

    let mut transcripts = Vec::new();
    for path in input_files(&input)? {
        let (t, _) = read_transcript(&path, TranscriptFormat::from_path(&path)).map_err(CliError::usage)?;
        transcripts.push(t);
    }

    let gateway = HttpGateway::new(cfg.gateway.clone());
    if !gateway.is_available() {
        return Err(CliError::unavailable(format!(
            "no inference server at {}; analyses need one (nothing was written)",
            cfg.gateway.base_url
        )));
    }

    let opts = AnalysisOptions {
        kinds: args
            .kinds
            .clone()
            .map(|k| k.0)
            .unwrap_or_else(|| AnalysisKind::ALL.to_vec()),
        dedup_window: args.dedup_window,
        out_dir: Some(out.clone()),
        model_name: gateway.model_name().to_string(),
        lanes,
    };
    let report = analyze_corpus(&transcripts, &gateway, &opts);
    for (kind, t) in &report.tally {
        println!("{kind}: {} ok, {} failed, {} skipped", t.ok, t.failed, t.skipped);
    }
    for item in report.items.iter().filter(|i| i.status == ItemStatus::Failed) {
        eprintln!(
            "lectern: {} {}: {}",
            item.lecture_id,
            item.kind,
            item.error.as_deref().unwrap_or("failed")
        );
    }
    if report.bimodal_suspect {
        if let Some((count, n)) = report.dominant_question_count {
            eprintln!("lectern: warning: {n} lectures produced exactly {count} questions");
        }
    }
    println!("wrote {}", out.display());
    Ok(if report.each_kind_succeeded() { OK } else { FAILURE })
}
