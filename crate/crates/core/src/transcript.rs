//! Timestamped lecture transcripts: parsing, hallucination-loop removal and
//! corpus quality statistics.
//!
//! A hallucination loop is a run of three or more consecutive segments whose
//! trimmed text is byte-identical. Cleaning keeps the first segment of each
//! run and drops the rest; everything else passes through untouched and in
//! order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shortest run of identical segments treated as a loop.
pub const MIN_LOOP_RUN: usize = 3;

/// `source_meta` key set on transcripts that carry no timing information.
pub const META_TIMING: &str = "timing";
/// `source_meta` key recording that segments were re-sorted on ingest.
pub const META_RESORTED: &str = "resorted";
/// `source_meta` key holding the file a transcript was read from.
pub const META_SOURCE_FILE: &str = "source_file";

const FLAG_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed transcript at line {line}, column {column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("segment {index}: {reason}")]
    InvalidSegment { index: usize, reason: String },
    #[error("lecture_id must be non-empty")]
    EmptyLectureId,
    #[error("lecture {lecture_id} is unsegmented text; analyses that cannot be performed on unsegmented text require timestamps")]
    Untimed { lecture_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSegment {
    pub start: f64,
    pub end: f64,
    pub text: String,
}

impl TranscriptSegment {
    pub fn new(start: f64, end: f64, text: impl Into<String>) -> Self {
        Self {
            start,
            end,
            text: text.into(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    fn key(&self) -> &str {
        self.text.trim()
    }
}

/// One lecture's segments, sorted by start time.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub lecture_id: String,
    pub segments: Vec<TranscriptSegment>,
    pub source_meta: BTreeMap<String, String>,
}

impl Transcript {
    /// Validates segments and sorts them by start time.
    ///
    /// Out-of-order input is re-sorted (stable) and the fact is recorded in
    /// `source_meta` under [`META_RESORTED`].
    pub fn new(lecture_id: impl Into<String>, segments: Vec<TranscriptSegment>) -> Result<Self, TranscriptError> {
        let lecture_id = lecture_id.into();
        if lecture_id.trim().is_empty() {
            return Err(TranscriptError::EmptyLectureId);
        }
        for (index, seg) in segments.iter().enumerate() {
            validate_segment(index, seg)?;
        }
        let mut t = Transcript {
            lecture_id,
            segments,
            source_meta: BTreeMap::new(),
        };
        if !t.segments.windows(2).all(|w| w[0].start <= w[1].start) {
            t.segments.sort_by(|a, b| a.start.total_cmp(&b.start));
            log::info!("{}: segments re-sorted by start time", t.lecture_id);
            t.source_meta.insert(META_RESORTED.into(), "true".into());
        }
        Ok(t)
    }

    /// A transcript without timing: the whole text as one segment at 0..0.
    pub fn untimed(lecture_id: impl Into<String>, text: &str) -> Result<Self, TranscriptError> {
        let lecture_id = lecture_id.into();
        if lecture_id.trim().is_empty() {
            return Err(TranscriptError::EmptyLectureId);
        }
        let text = text.trim();
        let segments = if text.is_empty() {
            Vec::new()
        } else {
            vec![TranscriptSegment::new(0.0, 0.0, text)]
        };
        let mut source_meta = BTreeMap::new();
        source_meta.insert(META_TIMING.into(), "untimed".into());
        Ok(Transcript {
            lecture_id,
            segments,
            source_meta,
        })
    }

    pub fn is_timed(&self) -> bool {
        self.source_meta.get(META_TIMING).map(String::as_str) != Some("untimed")
    }

    /// Errors with [`TranscriptError::Untimed`] for unsegmented text.
    pub fn require_timed(&self) -> Result<(), TranscriptError> {
        if self.is_timed() {
            Ok(())
        } else {
            Err(TranscriptError::Untimed {
                lecture_id: self.lecture_id.clone(),
            })
        }
    }

    /// End of the last segment, in seconds.
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.end).fold(0.0, f64::max)
    }

    /// All segment texts joined by single spaces.
    pub fn full_text(&self) -> String {
        self.segments
            .iter()
            .map(|s| s.text.trim())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Whitespace-token count over all segments.
    pub fn word_count(&self) -> usize {
        self.segments.iter().map(|s| s.text.split_whitespace().count()).sum()
    }
}

fn validate_segment(index: usize, seg: &TranscriptSegment) -> Result<(), TranscriptError> {
    let bad = |reason: String| Err(TranscriptError::InvalidSegment { index, reason });
    if !seg.start.is_finite() || seg.start < 0.0 {
        return bad(format!("start {} must be a non-negative number", seg.start));
    }
    if !seg.end.is_finite() || seg.end <= seg.start {
        return bad(format!("end {} must be greater than start {}", seg.end, seg.start));
    }
    if seg.text.trim().is_empty() {
        return bad("text is empty".into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptFormat {
    /// JSON object with `lecture_id`, `segments` and optional `meta`.
    SegmentedJson,
    /// One block of continuous text; the lecture id is the file stem.
    PlainText,
}

impl TranscriptFormat {
    /// Guesses the format from the file extension (`.json` is segmented).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::SegmentedJson,
            _ => Self::PlainText,
        }
    }
}

/// On-disk shape of segmented and cleaned transcript files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub lecture_id: String,
    pub segments: Vec<TranscriptSegment>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean_report: Option<CleanReport>,
}

impl TranscriptFile {
    pub fn from_transcript(t: &Transcript, report: Option<&CleanReport>) -> Self {
        TranscriptFile {
            lecture_id: t.lecture_id.clone(),
            segments: t.segments.clone(),
            meta: t.source_meta.clone(),
            clean_report: report.cloned(),
        }
    }

    pub fn into_transcript(self) -> Result<(Transcript, Option<CleanReport>), TranscriptError> {
        let untimed = self.meta.get(META_TIMING).map(String::as_str) == Some("untimed");
        let mut t = if untimed {
            let text: Vec<&str> = self.segments.iter().map(|s| s.text.as_str()).collect();
            Transcript::untimed(self.lecture_id, &text.join(" "))?
        } else {
            Transcript::new(self.lecture_id, self.segments)?
        };
        for (k, v) in self.meta {
            t.source_meta.entry(k).or_insert(v);
        }
        Ok((t, self.clean_report))
    }
}

/// Reads a transcript file. A `clean_report` already present in a cleaned
/// file is returned alongside.
pub fn read_transcript(
    path: &Path,
    format: TranscriptFormat,
) -> Result<(Transcript, Option<CleanReport>), TranscriptError> {
    let raw = fs::read_to_string(path).map_err(|source| TranscriptError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (mut t, report) = match format {
        TranscriptFormat::SegmentedJson => {
            let file: TranscriptFile = serde_json::from_str(&raw).map_err(|e| TranscriptError::Json {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            file.into_transcript()?
        }
        TranscriptFormat::PlainText => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            (Transcript::untimed(stem, &raw)?, None)
        }
    };
    t.source_meta
        .entry(META_SOURCE_FILE.into())
        .or_insert_with(|| path.display().to_string());
    Ok((t, report))
}

/// Parses a transcript file, discarding any stored clean report.
pub fn parse_transcript(path: &Path, format: TranscriptFormat) -> Result<Transcript, TranscriptError> {
    read_transcript(path, format).map(|(t, _)| t)
}

/// The `.json` and `.txt` files directly inside `dir`, sorted by name.
pub fn transcript_paths(dir: &Path) -> Result<Vec<PathBuf>, TranscriptError> {
    let entries = fs::read_dir(dir).map_err(|source| TranscriptError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            matches!(
                p.extension()
                    .and_then(|e| e.to_str())
                    .map(str::to_ascii_lowercase)
                    .as_deref(),
                Some("json" | "txt")
            )
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Reads every transcript under `dir` (see [`transcript_paths`]), stopping
/// at the first bad file.
pub fn read_transcript_dir(dir: &Path) -> Result<Vec<(Transcript, Option<CleanReport>)>, TranscriptError> {
    transcript_paths(dir)?
        .iter()
        .map(|p| read_transcript(p, TranscriptFormat::from_path(p)))
        .collect()
}

/// Writes `t` (plus `report` when given) in the segmented JSON shape.
pub fn write_transcript(path: &Path, t: &Transcript, report: Option<&CleanReport>) -> Result<(), TranscriptError> {
    let file = TranscriptFile::from_transcript(t, report);
    let body = serde_json::to_string_pretty(&file).expect("transcript serializes");
    fs::write(path, body + "\n").map_err(|source| TranscriptError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One detected run of identical segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub text: String,
    pub count: usize,
    pub first_start: f64,
    pub last_end: f64,
    /// Time span the loop occupies (`last_end - first_start`).
    #[serde(rename = "duration_removed_s")]
    pub duration_removed: f64,
    pub segments_removed: usize,
    /// Index of the first segment of the run in the source transcript.
    #[serde(default)]
    pub first_index: usize,
    /// Every segment in the run lasts exactly one second. Advisory only.
    #[serde(default)]
    pub one_second_durations: bool,
    /// Each segment starts where the previous one ended. Advisory only.
    #[serde(default)]
    pub zero_gaps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    #[serde(default)]
    pub lecture_id: String,
    #[serde(rename = "raw_segments")]
    pub raw_segment_count: usize,
    #[serde(rename = "removed_segments")]
    pub removed_segment_count: usize,
    #[serde(rename = "removed_duration_s")]
    pub removed_duration: f64,
    pub loops: Vec<LoopRecord>,
    #[serde(rename = "clean_segments", default)]
    pub clean_segment_count: usize,
}

/// Finds every maximal run of at least [`MIN_LOOP_RUN`] consecutive segments
/// with identical trimmed text.
pub fn detect_loops(t: &Transcript) -> Vec<LoopRecord> {
    let segs = &t.segments;
    let mut loops = Vec::new();
    let mut i = 0;
    while i < segs.len() {
        let mut j = i + 1;
        while j < segs.len() && segs[j].key() == segs[i].key() {
            j += 1;
        }
        if j - i >= MIN_LOOP_RUN {
            loops.push(loop_record(&segs[i..j], i));
        }
        i = j;
    }
    loops
}

fn loop_record(run: &[TranscriptSegment], first_index: usize) -> LoopRecord {
    let first = &run[0];
    let last = &run[run.len() - 1];
    LoopRecord {
        text: first.key().to_string(),
        count: run.len(),
        first_start: first.start,
        last_end: last.end,
        duration_removed: (last.end - first.start).max(0.0),
        segments_removed: run.len() - 1,
        first_index,
        one_second_durations: run.iter().all(|s| (s.duration() - 1.0).abs() < FLAG_EPS),
        zero_gaps: run.windows(2).all(|w| (w[1].start - w[0].end).abs() < FLAG_EPS),
    }
}

/// Removes hallucination loops, keeping the first segment of each.
pub fn clean_transcript(t: &Transcript) -> (Transcript, CleanReport) {
    let loops = detect_loops(t);
    let mut keep = vec![true; t.segments.len()];
    for l in &loops {
        for k in keep.iter_mut().skip(l.first_index + 1).take(l.segments_removed) {
            *k = false;
        }
    }
    let segments: Vec<TranscriptSegment> = t
        .segments
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(s, _)| s.clone())
        .collect();
    let removed: usize = loops.iter().map(|l| l.segments_removed).sum();
    let report = CleanReport {
        lecture_id: t.lecture_id.clone(),
        raw_segment_count: t.segments.len(),
        removed_segment_count: removed,
        removed_duration: loops.iter().map(|l| l.duration_removed).fold(0.0, |a, b| a + b),
        clean_segment_count: segments.len(),
        loops,
    };
    let cleaned = Transcript {
        lecture_id: t.lecture_id.clone(),
        segments,
        source_meta: t.source_meta.clone(),
    };
    (cleaned, report)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub lectures: usize,
    /// Lectures with no segments at all.
    pub empty_lectures: usize,
    pub audio_seconds: f64,
    pub raw_segments: usize,
    pub loops: usize,
    pub removed_segments: usize,
    pub removed_duration: f64,
    pub clean_segments: usize,
}

impl CorpusStats {
    pub fn removed_fraction(&self) -> f64 {
        if self.raw_segments == 0 {
            0.0
        } else {
            self.removed_segments as f64 / self.raw_segments as f64
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("transcripts and clean reports are not aligned; orphans: {}", orphans.join(", "))]
    Mismatched { orphans: Vec<String> },
    #[error("duplicate lecture id {0}")]
    Duplicate(String),
}

/// Totals per-lecture clean reports into corpus-wide statistics.
///
/// `transcripts` are the raw (pre-cleaning) transcripts; the two lists must
/// cover the same lecture ids, in any order.
pub fn corpus_stats(transcripts: &[Transcript], reports: &[CleanReport]) -> Result<CorpusStats, StatsError> {
    let mut t_ids = BTreeSet::new();
    for t in transcripts {
        if !t_ids.insert(t.lecture_id.as_str()) {
            return Err(StatsError::Duplicate(t.lecture_id.clone()));
        }
    }
    let mut r_ids = BTreeSet::new();
    for r in reports {
        if !r_ids.insert(r.lecture_id.as_str()) {
            return Err(StatsError::Duplicate(r.lecture_id.clone()));
        }
    }
    let orphans: Vec<String> = t_ids.symmetric_difference(&r_ids).map(|s| s.to_string()).collect();
    if !orphans.is_empty() {
        return Err(StatsError::Mismatched { orphans });
    }

    let mut stats = CorpusStats {
        lectures: transcripts.len(),
        ..Default::default()
    };
    for t in transcripts {
        stats.audio_seconds += t.duration();
        if t.segments.is_empty() {
            stats.empty_lectures += 1;
        }
    }
    for r in reports {
        stats.raw_segments += r.raw_segment_count;
        stats.loops += r.loops.len();
        stats.removed_segments += r.removed_segment_count;
        stats.removed_duration += r.removed_duration;
        stats.clean_segments += r.clean_segment_count;
    }
    Ok(stats)
}
