use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::dedup::DEFAULT_DEDUP_WINDOW_S;
use super::passes::{catalog_anecdotes, detect_confusion, extract_questions, summarize, AnalysisError, Analyzed};
use crate::llm::{DecodeNote, LanguageModel};
use crate::transcript::Transcript;

/// Share of lectures with one identical question count that raises the
/// bimodal-output warning.
pub const BIMODAL_SHARE: f64 = 0.6;
/// Fewer lectures than this never raise it.
pub const BIMODAL_MIN_LECTURES: usize = 5;

pub const RUN_REPORT_FILE: &str = "run_report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisKind {
    Summary,
    Questions,
    Confusion,
    Anecdotes,
}

impl AnalysisKind {
    pub const ALL: [AnalysisKind; 4] = [
        AnalysisKind::Summary,
        AnalysisKind::Questions,
        AnalysisKind::Confusion,
        AnalysisKind::Anecdotes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisKind::Summary => "summary",
            AnalysisKind::Questions => "questions",
            AnalysisKind::Confusion => "confusion",
            AnalysisKind::Anecdotes => "anecdotes",
        }
    }

    /// Parses a comma-separated list such as `summary,questions`.
    pub fn parse_list(list: &str) -> Result<Vec<AnalysisKind>, String> {
        let mut kinds = Vec::new();
        for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let k: AnalysisKind = part.parse()?;
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        if kinds.is_empty() {
            return Err("no analysis kinds given".into());
        }
        Ok(kinds)
    }
}

impl fmt::Display for AnalysisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnalysisKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnalysisKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown analysis kind {s:?} (expected summary, questions, confusion or anecdotes)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub kinds: Vec<AnalysisKind>,
    pub dedup_window: f64,
    /// Where per-lecture files and the run report go; `None` writes nothing.
    pub out_dir: Option<PathBuf>,
    /// Recorded in every output file.
    pub model_name: String,
    /// Lectures analyzed concurrently.
    pub lanes: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            kinds: AnalysisKind::ALL.to_vec(),
            dedup_window: DEFAULT_DEDUP_WINDOW_S,
            out_dir: None,
            model_name: String::new(),
            lanes: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemStatus {
    Ok,
    Failed,
    /// The lecture has no segments; nothing to analyze.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunItem {
    pub lecture_id: String,
    pub kind: AnalysisKind,
    pub status: ItemStatus,
    pub records: usize,
    pub calls: usize,
    pub elapsed_s: f64,
    pub error: Option<String>,
    pub notes: Vec<DecodeNote>,
    #[serde(skip)]
    pub output: Option<Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindTally {
    pub ok: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub generated_at: String,
    pub lectures: usize,
    pub elapsed_s: f64,
    pub tally: BTreeMap<AnalysisKind, KindTally>,
    pub items: Vec<RunItem>,
    /// Lecture id to number of questions kept.
    pub question_counts: BTreeMap<String, usize>,
    /// Most common question count and how many lectures share it.
    pub dominant_question_count: Option<(usize, usize)>,
    pub bimodal_suspect: bool,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.tally.values().map(|t| t.failed).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// True when every requested kind has at least one success.
    pub fn each_kind_succeeded(&self) -> bool {
        !self.tally.is_empty() && self.tally.values().all(|t| t.ok > 0)
    }
}

/// Flags a suspicious pile-up: at least [`BIMODAL_SHARE`] of lectures with
/// exactly the same question count. Returns the dominant count, its
/// frequency and the flag.
pub fn bimodal_check(counts: &BTreeMap<String, usize>) -> (Option<(usize, usize)>, bool) {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for c in counts.values() {
        *freq.entry(*c).or_default() += 1;
    }
    let dominant = freq
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(c, n)| (*c, *n));
    let flag = counts.len() >= BIMODAL_MIN_LECTURES
        && dominant.is_some_and(|(_, n)| n as f64 >= BIMODAL_SHARE * counts.len() as f64);
    (dominant, flag)
}

fn records_json<T: Serialize>(a: &Analyzed<T>) -> Value {
    serde_json::to_value(&a.records).unwrap_or(Value::Array(Vec::new()))
}

fn run_one(t: &Transcript, kind: AnalysisKind, model: &dyn LanguageModel, opts: &AnalysisOptions) -> RunItem {
    let started = Instant::now();
    let result: Result<(Value, usize, usize, Vec<DecodeNote>), AnalysisError> = match kind {
        AnalysisKind::Summary => summarize(t, model).map(|a| (records_json(&a), a.records.len(), a.calls, a.notes)),
        AnalysisKind::Questions => {
            extract_questions(t, model).map(|a| (records_json(&a), a.records.len(), a.calls, a.notes))
        }
        AnalysisKind::Confusion => {
            detect_confusion(t, model, opts.dedup_window).map(|a| (records_json(&a), a.records.len(), a.calls, a.notes))
        }
        AnalysisKind::Anecdotes => {
            catalog_anecdotes(t, model).map(|a| (records_json(&a), a.records.len(), a.calls, a.notes))
        }
    };
    let elapsed_s = started.elapsed().as_secs_f64();
    let base = RunItem {
        lecture_id: t.lecture_id.clone(),
        kind,
        status: ItemStatus::Ok,
        records: 0,
        calls: 0,
        elapsed_s,
        error: None,
        notes: Vec::new(),
        output: None,
    };
    match result {
        Ok((records, n, calls, notes)) => RunItem {
            records: n,
            calls,
            notes,
            output: Some(records),
            ..base
        },
        Err(e) => {
            let status = if matches!(e, AnalysisError::EmptyTranscript { .. }) {
                ItemStatus::Skipped
            } else {
                log::warn!("{kind} failed: {e}");
                ItemStatus::Failed
            };
            let notes = match &e {
                AnalysisError::Model {
                    source: crate::llm::StructuredError::Decode { notes, .. },
                    ..
                } => notes.clone(),
                _ => Vec::new(),
            };
            RunItem {
                status,
                error: Some(e.to_string()),
                notes,
                ..base
            }
        }
    }
}

/// Path of one analysis output file.
pub fn output_path(dir: &Path, lecture_id: &str, kind: AnalysisKind) -> PathBuf {
    dir.join(format!("{lecture_id}.{kind}.json"))
}

fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut body = serde_json::to_string_pretty(value).expect("json values serialize");
    body.push('\n');
    fs::write(path, body)
}

/// Runs the requested analyses over every lecture. A failing lecture is
/// recorded and the run goes on. Lectures are spread over `opts.lanes`
/// worker threads; the analyses of one lecture run in order.
pub fn analyze_corpus(transcripts: &[Transcript], model: &dyn LanguageModel, opts: &AnalysisOptions) -> RunReport {
    let started = Instant::now();
    let generated_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    if let Some(dir) = &opts.out_dir {
        if let Err(e) = fs::create_dir_all(dir) {
            log::error!("cannot create {}: {e}", dir.display());
        }
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Vec<RunItem>>>> = Mutex::new(vec![None; transcripts.len()]);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(t) = transcripts.get(i) else { break };
        log::info!("analyzing lecture {} ({}/{})", t.lecture_id, i + 1, transcripts.len());
        let items: Vec<RunItem> = opts.kinds.iter().map(|k| run_one(t, *k, model, opts)).collect();
        slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(items);
    };
    std::thread::scope(|s| {
        for _ in 0..opts.lanes.max(1).min(transcripts.len().max(1)) {
            s.spawn(worker);
        }
    });
    let mut items: Vec<RunItem> = slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .flatten()
        .flatten()
        .collect();

    if let Some(dir) = &opts.out_dir {
        for item in items.iter_mut().filter(|i| i.status == ItemStatus::Ok) {
            let doc = json!({
                "lecture_id": item.lecture_id,
                "kind": item.kind,
                "model": opts.model_name,
                "generated_at": generated_at,
                "records": item.output.take().unwrap_or(Value::Array(Vec::new())),
            });
            let path = output_path(dir, &item.lecture_id, item.kind);
            if let Err(e) = write_json(&path, &doc) {
                item.status = ItemStatus::Failed;
                item.error = Some(format!("{}: {e}", path.display()));
            }
        }
    }

    let mut tally: BTreeMap<AnalysisKind, KindTally> = opts.kinds.iter().map(|k| (*k, KindTally::default())).collect();
    let mut question_counts = BTreeMap::new();
    for item in &items {
        let t = tally.entry(item.kind).or_default();
        match item.status {
            ItemStatus::Ok => t.ok += 1,
            ItemStatus::Failed => t.failed += 1,
            ItemStatus::Skipped => t.skipped += 1,
        }
        if item.kind == AnalysisKind::Questions && item.status == ItemStatus::Ok {
            question_counts.insert(item.lecture_id.clone(), item.records);
        }
    }
    let (dominant_question_count, bimodal_suspect) = bimodal_check(&question_counts);
    if bimodal_suspect {
        log::warn!(
            "{} of {} lectures produced exactly {} questions; the question output may be collapsing",
            dominant_question_count.map_or(0, |d| d.1),
            question_counts.len(),
            dominant_question_count.map_or(0, |d| d.0),
        );
    }
    let report = RunReport {
        model: opts.model_name.clone(),
        generated_at,
        lectures: transcripts.len(),
        elapsed_s: started.elapsed().as_secs_f64(),
        tally: if transcripts.is_empty() { BTreeMap::new() } else { tally },
        items,
        question_counts,
        dominant_question_count,
        bimodal_suspect,
    };
    if let Some(dir) = &opts.out_dir {
        let value = serde_json::to_value(&report).expect("report serializes");
        if let Err(e) = write_json(&dir.join(RUN_REPORT_FILE), &value) {
            log::error!("cannot write run report: {e}");
        }
    }
    report
}

/// Reads a run report written by [`analyze_corpus`].
pub fn load_run_report(path: &Path) -> Result<RunReport, String> {
    let body = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&body).map_err(|e| format!("{}: {e}", path.display()))
}
