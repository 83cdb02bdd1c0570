use std::fs;
use std::path::PathBuf;

use lectern::book_index::{vocabulary_prompt, PageRange};

use crate::config::AppConfig;
use crate::exit::{CliError, CliResult, OK};

/// Whisper reads at most this many prompt tokens.
pub const DEFAULT_BUDGET: usize = 224;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Only topics with pages in FIRST:LAST.
    #[arg(long, value_name = "FIRST:LAST", value_parser = parse_pages)]
    pages: Option<PageRange>,
    /// Token budget for the prompt.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Index JSON file; overrides `index_path`.
    #[arg(long, value_name = "PATH")]
    index: Option<PathBuf>,
    /// Write the prompt to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn parse_pages(s: &str) -> Result<PageRange, String> {
    let (a, b) = s.split_once(':').ok_or("expected FIRST:LAST")?;
    let first: u32 = a.trim().parse().map_err(|_| format!("bad page {a:?}"))?;
    let last: u32 = b.trim().parse().map_err(|_| format!("bad page {b:?}"))?;
    PageRange::new(first, last).ok_or_else(|| format!("{first}:{last} is not a valid page range"))
}

pub fn run(args: &Args, mut cfg: AppConfig) -> CliResult {
    if let Some(p) = &args.index {
        cfg.index_path = Some(p.clone());
    }
    let index = cfg.index()?;
    let prompt = vocabulary_prompt(&index, args.pages, args.budget);
    match &args.out {
        Some(path) => {
            fs::write(path, format!("{prompt}\n")).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))?
        }
        None => println!("{prompt}"),
    }
    Ok(OK)
}
