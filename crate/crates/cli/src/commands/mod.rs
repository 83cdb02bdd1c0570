pub mod analyze;
pub mod clean;
pub mod query;
pub mod report;
pub mod vocab;

use std::path::{Path, PathBuf};

use lectern::transcript::transcript_paths;

use crate::exit::CliError;

/// Transcript files named by `path`: the file itself, or the transcripts
/// inside a directory.
pub fn input_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(CliError::usage(format!(
            "{}: no such file or directory",
            path.display()
        )));
    }
    let files = transcript_paths(path).map_err(CliError::usage)?;
    if files.is_empty() {
        return Err(CliError::usage(format!(
            "{}: no .json or .txt transcripts",
            path.display()
        )));
    }
    Ok(files)
}

/// `H:MM:SS`
pub fn clock(seconds: f64) -> String {
    let s = seconds.max(0.0).round() as u64;
    format!("{}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
}
