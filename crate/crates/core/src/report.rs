//! Corpus-level reports for the instructor: transcript quality, a
//! comparison between two ASR systems, and a digest of an analysis run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::RunReport;
use crate::text;
use crate::transcript::{CorpusStats, Transcript};

/// Counts whole-word, case-insensitive occurrences of `term` in `text`.
///
/// Hyphens read as spaces and multi-word terms match contiguous words. A
/// term written with a trailing `(s)`, such as `thermodynamic(s)`, also
/// matches its last word with an `s` appended.
pub fn count_term(text: &str, term: &str) -> usize {
    let (base, plural) = match term.trim().strip_suffix("(s)") {
        Some(b) => (b, true),
        None => (term, false),
    };
    let needle = text::words(base);
    let Some((last, head)) = needle.split_last() else {
        return 0;
    };
    let plural_last = format!("{last}s");
    let hay = text::words(text);
    if hay.len() < needle.len() {
        return 0;
    }
    hay.windows(needle.len())
        .filter(|w| {
            let (w_last, w_head) = w.split_last().expect("non-empty window");
            w_head == head && (w_last == last || (plural && *w_last == plural_last))
        })
        .count()
}

/// Reads a term list: one term per line, `#` starts a comment.
pub fn parse_term_list(body: &str) -> Vec<String> {
    body.lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermCountRow {
    pub term: String,
    pub count_a: usize,
    pub count_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LecturePair {
    pub lecture_id: String,
    pub words_a: usize,
    pub words_b: usize,
    /// `words_b / words_a`; absent when side a is empty.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    pub pairs: Vec<LecturePair>,
    pub term_rows: Vec<TermCountRow>,
    /// Lectures present on only one side.
    pub unmatched_a: Vec<String>,
    pub unmatched_b: Vec<String>,
}

impl ComparisonReport {
    pub fn mean_words(&self) -> (f64, f64) {
        if self.pairs.is_empty() {
            return (0.0, 0.0);
        }
        let n = self.pairs.len() as f64;
        let a: usize = self.pairs.iter().map(|p| p.words_a).sum();
        let b: usize = self.pairs.iter().map(|p| p.words_b).sum();
        (a as f64 / n, b as f64 / n)
    }

    /// Smallest and largest per-lecture ratio.
    pub fn ratio_range(&self) -> Option<(f64, f64)> {
        let ratios: Vec<f64> = self.pairs.iter().filter_map(|p| p.ratio).collect();
        let min = ratios.iter().copied().reduce(f64::min)?;
        let max = ratios.iter().copied().reduce(f64::max)?;
        Some((min, max))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error("no lecture ids are shared between the two corpora")]
    NoMatchedPairs,
    #[error("empty term in the term list")]
    EmptyTerm,
}

/// Pairs lectures by id and compares word counts and term frequencies.
/// Term counts are summed over matched lectures only.
pub fn compare_corpora(
    a: &[Transcript],
    b: &[Transcript],
    terms: &[String],
    labels: (&str, &str),
) -> Result<ComparisonReport, CompareError> {
    if terms.iter().any(|t| text::words(t).is_empty()) {
        return Err(CompareError::EmptyTerm);
    }
    let by_id = |ts: &[Transcript]| -> BTreeMap<String, String> {
        ts.iter().map(|t| (t.lecture_id.clone(), t.full_text())).collect()
    };
    let (ma, mb) = (by_id(a), by_id(b));
    let mut pairs = Vec::new();
    let mut rows: Vec<TermCountRow> = terms
        .iter()
        .map(|t| TermCountRow {
            term: t.clone(),
            count_a: 0,
            count_b: 0,
        })
        .collect();
    for (id, text_a) in &ma {
        let Some(text_b) = mb.get(id) else { continue };
        let words_a = text_a.split_whitespace().count();
        let words_b = text_b.split_whitespace().count();
        pairs.push(LecturePair {
            lecture_id: id.clone(),
            words_a,
            words_b,
            ratio: (words_a > 0).then(|| words_b as f64 / words_a as f64),
        });
        for row in &mut rows {
            row.count_a += count_term(text_a, &row.term);
            row.count_b += count_term(text_b, &row.term);
        }
    }
    if pairs.is_empty() {
        return Err(CompareError::NoMatchedPairs);
    }
    Ok(ComparisonReport {
        label_a: labels.0.to_string(),
        label_b: labels.1.to_string(),
        pairs,
        term_rows: rows,
        unmatched_a: ma.keys().filter(|k| !mb.contains_key(*k)).cloned().collect(),
        unmatched_b: mb.keys().filter(|k| !ma.contains_key(*k)).cloned().collect(),
    })
}

/// A rendered report in both forms.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub text: String,
    pub json: Value,
}

impl RenderedReport {
    /// Writes `report.txt` and `report.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.txt"), &self.text)?;
        let mut body = serde_json::to_string_pretty(&self.json).expect("json values serialize");
        body.push('\n');
        fs::write(dir.join("report.json"), body)
    }
}

/// `20,361`
pub fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn percent(part: f64, whole: f64) -> String {
    if whole <= 0.0 {
        return "n/a".into();
    }
    let p = 100.0 * part / whole;
    if p == 0.0 {
        "0%".into()
    } else if p < 0.01 {
        "<0.01%".into()
    } else if p < 1.0 {
        format!("{p:.2}%")
    } else {
        format!("{p:.1}%")
    }
}

fn duration_label(seconds: f64) -> String {
    if seconds >= 7200.0 {
        format!("{:.1} hr", seconds / 3600.0)
    } else {
        format!("{:.1} min", seconds / 60.0)
    }
}

fn table(out: &mut String, title: &str, rows: &[(String, String)]) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", "=".repeat(title.len()));
    for (k, v) in rows {
        let _ = writeln!(out, "{k}: {v}");
    }
}

fn stats_section(out: &mut String, s: &CorpusStats) -> Value {
    let rows = vec![
        ("Lectures".to_string(), s.lectures.to_string()),
        ("Lectures without segments".to_string(), s.empty_lectures.to_string()),
        ("Audio duration".to_string(), duration_label(s.audio_seconds)),
        ("Raw segments".to_string(), thousands(s.raw_segments)),
        ("Hallucination loops".to_string(), s.loops.to_string()),
        (
            "Segments removed".to_string(),
            format!(
                "{} ({})",
                thousands(s.removed_segments),
                percent(s.removed_segments as f64, s.raw_segments as f64)
            ),
        ),
        (
            "Time lost to hallucination".to_string(),
            format!(
                "{:.1} s ({})",
                s.removed_duration,
                percent(s.removed_duration, s.audio_seconds)
            ),
        ),
        ("Segments after cleaning".to_string(), thousands(s.clean_segments)),
    ];
    table(out, "Transcript quality", &rows);
    serde_json::to_value(s).expect("stats serialize")
}

fn comparison_section(out: &mut String, c: &ComparisonReport) -> Value {
    let (ma, mb) = c.mean_words();
    let mut rows = vec![
        ("Matched lectures".to_string(), c.pairs.len().to_string()),
        (
            "Mean word count".to_string(),
            format!(
                "{} / {}",
                thousands(ma.round() as usize),
                thousands(mb.round() as usize)
            ),
        ),
    ];
    if let Some((lo, hi)) = c.ratio_range() {
        rows.push(("Word count ratio".to_string(), format!("{lo:.3}--{hi:.3}")));
    }
    for r in &c.term_rows {
        rows.push((
            format!("\"{}\" (total)", r.term),
            format!("{} / {}", r.count_a, r.count_b),
        ));
    }
    if !c.unmatched_a.is_empty() {
        rows.push((format!("Only in {}", c.label_a), c.unmatched_a.join(", ")));
    }
    if !c.unmatched_b.is_empty() {
        rows.push((format!("Only in {}", c.label_b), c.unmatched_b.join(", ")));
    }
    table(
        out,
        &format!("Transcript comparison ({} / {})", c.label_a, c.label_b),
        &rows,
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<12} {:>10} {:>10} {:>7}",
        "Lecture", c.label_a, c.label_b, "Ratio"
    );
    for p in &c.pairs {
        let ratio = p.ratio.map_or_else(|| "n/a".to_string(), |r| format!("{r:.3}"));
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>10} {:>7}",
            p.lecture_id, p.words_a, p.words_b, ratio
        );
    }
    serde_json::to_value(c).expect("comparison serializes")
}

fn analysis_section(out: &mut String, r: &RunReport) -> Value {
    let mut rows = vec![
        ("Model".to_string(), r.model.clone()),
        ("Lectures".to_string(), r.lectures.to_string()),
    ];
    for (kind, t) in &r.tally {
        rows.push((
            format!("{kind}"),
            format!("{} ok, {} failed, {} skipped", t.ok, t.failed, t.skipped),
        ));
    }
    if !r.question_counts.is_empty() {
        let counts: Vec<usize> = r.question_counts.values().copied().collect();
        let min = counts.iter().min().copied().unwrap_or(0);
        let max = counts.iter().max().copied().unwrap_or(0);
        rows.push(("Questions per lecture".to_string(), format!("{min}--{max}")));
        if let Some((c, n)) = r.dominant_question_count {
            let mut v = format!("{c} ({n} of {} lectures)", counts.len());
            if r.bimodal_suspect {
                v.push_str(" SUSPECT");
            }
            rows.push(("Most common question count".to_string(), v));
        }
    }
    let notes: usize = r.items.iter().map(|i| i.notes.len()).sum();
    rows.push(("Decode notes".to_string(), notes.to_string()));
    table(out, "Analysis run", &rows);
    let failed: Vec<&crate::analysis::RunItem> = r
        .items
        .iter()
        .filter(|i| i.status == crate::analysis::ItemStatus::Failed)
        .collect();
    if !failed.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Failures:");
        for i in failed {
            let _ = writeln!(
                out,
                "  {} {}: {}",
                i.lecture_id,
                i.kind,
                i.error.as_deref().unwrap_or("")
            );
        }
    }
    json!({
        "model": r.model,
        "lectures": r.lectures,
        "tally": r.tally,
        "question_counts": r.question_counts,
        "dominant_question_count": r.dominant_question_count,
        "bimodal_suspect": r.bimodal_suspect,
        "decode_notes": notes,
        "failures": r.failures(),
    })
}

/// Renders whichever sections have data. The same inputs always give the
/// same bytes; sections without data are omitted.
pub fn render_reports(
    stats: Option<&CorpusStats>,
    comparison: Option<&ComparisonReport>,
    analyses: Option<&RunReport>,
) -> RenderedReport {
    let mut text = String::new();
    let mut json = serde_json::Map::new();
    let sep = |text: &mut String| {
        if !text.is_empty() {
            text.push('\n');
        }
    };
    if let Some(s) = stats {
        sep(&mut text);
        json.insert("transcript_quality".into(), stats_section(&mut text, s));
    }
    if let Some(c) = comparison {
        sep(&mut text);
        json.insert("comparison".into(), comparison_section(&mut text, c));
    }
    if let Some(r) = analyses {
        sep(&mut text);
        json.insert("analysis".into(), analysis_section(&mut text, r));
    }
    RenderedReport {
        text,
        json: Value::Object(json),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::TranscriptSegment;

    fn lecture(id: &str, text: &str) -> Transcript {
        Transcript::new(id, vec![TranscriptSegment::new(0.0, 1.0, text)]).unwrap()
    }

    #[test]
    fn case_insensitive_word_counts() {
        assert_eq!(count_term("Entropy, entropy generation. ENTROPY!", "entropy"), 3);
        assert_eq!(count_term("isentropic process", "entropy"), 0);
    }

    #[test]
    fn multiword_and_plural_terms() {
        assert_eq!(
            count_term("the entropy-generation term; entropy generation", "entropy generation"),
            2
        );
        assert_eq!(
            count_term("thermodynamic thermodynamics thermodynamical", "thermodynamic(s)"),
            2
        );
        assert_eq!(count_term("thermodynamics", "thermodynamic"), 0);
        assert_eq!(count_term("anything", "  "), 0);
    }

    #[test]
    fn thousands_separators() {
        assert_eq!(thousands(826), "826");
        assert_eq!(thousands(20_361), "20,361");
        assert_eq!(thousands(1_000_000), "1,000,000");
    }

    #[test]
    fn identical_corpora_compare_equal() {
        let a = vec![
            lecture("026", "entropy and enthalpy"),
            lecture("027", "reversible entropy"),
        ];
        let terms = vec!["entropy".to_string(), "enthalpy".to_string()];
        let c = compare_corpora(&a, &a, &terms, ("a", "b")).unwrap();
        assert!(c.pairs.iter().all(|p| p.ratio == Some(1.0)));
        assert!(c.term_rows.iter().all(|r| r.count_a == r.count_b));
        assert_eq!(c.term_rows[0].count_a, 2);
    }

    #[test]
    fn orphans_are_listed_not_fatal() {
        let a = vec![lecture("026", "x y"), lecture("027", "x")];
        let b = vec![lecture("026", "x y z")];
        let c = compare_corpora(&a, &b, &[], ("a", "b")).unwrap();
        assert_eq!(c.pairs.len(), 1);
        assert_eq!(c.pairs[0].ratio, Some(1.5));
        assert_eq!(c.unmatched_a, ["027"]);
        assert_eq!(
            compare_corpora(&a, &[lecture("099", "q")], &[], ("a", "b")),
            Err(CompareError::NoMatchedPairs)
        );
    }

    #[test]
    fn stats_table_rows() {
        let s = CorpusStats {
            lectures: 1,
            empty_lectures: 0,
            audio_seconds: 3300.0,
            raw_segments: 826,
            loops: 4,
            removed_segments: 49,
            removed_duration: 74.3,
            clean_segments: 777,
        };
        let r = render_reports(Some(&s), None, None);
        assert!(r.text.contains("Raw segments: 826\n"));
        assert!(r.text.contains("55.0 min"));
        assert!(r.text.contains("49 (5.9%)"));
        assert!(!r.text.contains("comparison"));
        assert_eq!(r, render_reports(Some(&s), None, None));
        assert_eq!(render_reports(None, None, None).text, "");
    }
}
