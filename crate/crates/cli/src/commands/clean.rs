use std::fs;
use std::path::PathBuf;

use lectern::transcript::{clean_transcript, read_transcript, write_transcript, TranscriptFormat};

use super::{clock, input_files};
use crate::exit::{CliError, CliResult, FAILURE, OK};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// A transcript file or a directory of them.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Directory for cleaned transcripts, one `<lecture_id>.json` each.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run(args: &Args) -> CliResult {
    let files = input_files(&args.input)?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::usage(format!("{}: {e}", args.out.display())))?;
    let mut failed = 0;
    let (mut loops, mut removed, mut raw) = (0, 0, 0);
    for path in &files {
        let t = match read_transcript(path, TranscriptFormat::from_path(path)) {
            Ok((t, _)) => t,
            Err(e) => {
                eprintln!("lectern: {e}");
                failed += 1;
                continue;
            }
        };
        let (clean, report) = clean_transcript(&t);
        println!(
            "{}: {} segments, loops: {}, removed {} ({:.1} s), kept {}",
            t.lecture_id,
            report.raw_segment_count,
            report.loops.len(),
            report.removed_segment_count,
            report.removed_duration,
            report.clean_segment_count
        );
        for l in &report.loops {
            println!(
                "  {:?} x{} at {} ({:.1} s)",
                l.text,
                l.count,
                clock(l.first_start),
                l.duration_removed
            );
        }
        let out = args.out.join(format!("{}.json", t.lecture_id));
        if let Err(e) = write_transcript(&out, &clean, Some(&report)) {
            eprintln!("lectern: {e}");
            failed += 1;
            continue;
        }
        loops += report.loops.len();
        removed += report.removed_segment_count;
        raw += report.raw_segment_count;
    }
    if files.len() > 1 {
        println!(
            "total: {} files, {raw} segments, loops: {loops}, removed {removed}, failed {failed}",
            files.len()
        );
    }
    Ok(if failed > 0 { FAILURE } else { OK })
}
