//! Hostile model replies for the structured-output decoder: placeholder
//! literals copied from prompts, drifted field names and malformed JSON.

use lectern::analysis::{
    catalog_anecdotes, detect_confusion, extract_question_candidates, summarize, AnalysisError, QuestionCandidate,
    Speaker, DEFAULT_DEDUP_WINDOW_S,
};
use lectern::llm::{LanguageModel, DEFAULT_PLACEHOLDERS};
use lectern::transcript::{Transcript, TranscriptSegment};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

pub const LINES: [&str; 6] = [
    "Today we start on entropy.",
    "Why does heat flow from hot to cold?",
    "Think of a messy room that never cleans itself.",
    "Is entropy conserved?",
    "No, it is generated in every real process.",
    "Let's do an example.",
];

/// Analyses driven by [`run_kind`], by index.
pub const KINDS: [&str; 4] = ["confusion", "candidates", "anecdotes", "summary"];

/// A six-line lecture, one line a minute.
pub fn transcript() -> Transcript {
    let segs = LINES
        .iter()
        .enumerate()
        .map(|(i, l)| TranscriptSegment::new(i as f64 * 60.0, i as f64 * 60.0 + 50.0, *l))
        .collect();
    Transcript::new("L", segs).expect("ordered segments")
}

/// A confusion reply whose every timestamp is the prompt's placeholder.
pub fn all_placeholder_confusion() -> String {
    json!({"confusion_points": [
        {"timestamp": "H:MM:SS", "topic": "entropy", "evidence": "x", "severity": "minor"},
        {"timestamp": "H:MM:SS", "topic": "heat", "evidence": "y", "severity": "minor"}
    ]})
    .to_string()
}

/// A reply for analysis `kind` with placeholder literals in random fields,
/// sometimes wrapped in a code fence or prose.
pub fn placeholder_reply(rng: &mut impl Rng, kind: usize) -> String {
    fn maybe(rng: &mut impl Rng, real: &str) -> String {
        let lit = *DEFAULT_PLACEHOLDERS.choose(rng).expect("non-empty");
        match rng.gen_range(0..4) {
            0 => lit.to_string(),
            1 => format!("at {lit} or so"),
            _ => real.to_string(),
        }
    }
    let n = rng.gen_range(0..5);
    let v = match kind {
        0 => json!({"confusion_points": (0..n).map(|i| json!({
            "timestamp": maybe(rng, &format!("0:0{i}:00")),
            "topic": maybe(rng, "entropy"),
            "evidence": maybe(rng, "asked twice"),
            "severity": "moderate",
        })).collect::<Vec<_>>()}),
        1 => json!({"candidates": (0..n).map(|i| json!({
            "timestamp": maybe(rng, &format!("0:0{i}:00")),
            "speaker": "student",
            "text": maybe(rng, LINES[1 + i % 3]),
        })).collect::<Vec<_>>()}),
        2 => json!({"items": (0..n).map(|_| json!({
            "category": "analogy",
            "quote": maybe(rng, LINES[2]),
            "description": maybe(rng, "room"),
            "topic": maybe(rng, "see example.com"),
        })).collect::<Vec<_>>()}),
        _ => json!({
            "title": maybe(rng, "Entropy"),
            "lecture_type": "review",
            "topics": [{"name": maybe(rng, "entropy"), "description": maybe(rng, "intro")}],
            "narrative": maybe(rng, "Intro to entropy."),
        }),
    };
    let text = v.to_string();
    match rng.gen_range(0..6) {
        0 => format!("```json\n{text}\n```"),
        1 => format!("Sure! Here is the JSON:\n{text}\nHope this helps."),
        _ => text,
    }
}

/// Runs analysis `kind` (see [`KINDS`]) on [`transcript`] and returns its
/// records as JSON.
pub fn run_kind(kind: usize, model: &dyn LanguageModel) -> Result<Value, AnalysisError> {
    let t = transcript();
    let value = match kind {
        0 => serde_json::to_value(detect_confusion(&t, model, DEFAULT_DEDUP_WINDOW_S)?.records),
        1 => serde_json::to_value(extract_question_candidates(&t, model)?.records),
        2 => serde_json::to_value(catalog_anecdotes(&t, model)?.records),
        _ => serde_json::to_value(summarize(&t, model)?.records),
    };
    Ok(value.expect("records serialize"))
}

/// Confusion reply using `name`/`notes`/`concept`/`level` and a bare string.
pub fn drifted_confusion() -> String {
    json!({"confusion_points": [
        {"timestamp": "0:01:00", "name": "Heat flow direction", "notes": "asked why", "severity": "Moderate"},
        "a stray string",
        {"time": "0:03:00", "concept": "Entropy conservation", "description": "misconception", "level": "significant"}
    ]})
    .to_string()
}

/// Anecdote reply under a drifted array key with `notes` and a bare number.
pub fn drifted_anecdotes() -> String {
    json!({"anecdotes": [
        {"type": "analogy", "text": LINES[2], "notes": "a room", "related_topic": "entropy"},
        42
    ]})
    .to_string()
}

/// Summary reply with drifted keys and a bare-string topic.
pub fn drifted_summary() -> String {
    json!({"lecture_title": "Entropy", "type": "new material",
        "topics": [{"topic": "entropy", "notes": "first look"}, "bare topic"],
        "overview": "Starts entropy."})
    .to_string()
}

/// Replies that are empty, truncated, mistyped, fenced or otherwise broken.
pub fn malformed_replies() -> Vec<String> {
    let long = "x".repeat(100_000);
    let mut v: Vec<String> = [
        "",
        "null",
        "[]",
        "{}",
        "{\"confusion_points\": null}",
        "{\"confusion_points\": 7}",
        "{\"confusion_points\": [null, 1, true, [], {}]}",
        "{\"confusion_points\": [{\"timestamp\": 61, \"topic\": 5}]}",
        "{\"confusion_points\": [{\"timestamp\": \"99:99:99\", \"topic\": \"x\"}]}",
        "{\"confusion_points\": [{\"timestamp\": \"-0:01:00\", \"topic\": \"x\"}]}",
        "{\"confusion_points\": [{\"timestamp\": \"0:01:00\", \"topic\": \"\u{1F600}\"}]}",
        "{\"items\": [{\"quote\": \"not in the transcript\"}]}",
        "{\"candidates\": [{\"timestamp\": \"0:01:00\", \"text\": \"\"}]}",
        "{\"title\": \"\", \"narrative\": \"\"}",
        "{\"title\": \"T\", \"narrative\": \"N\", \"topics\": []}",
        "{\"questions\": [{\"id\": \"3\"}, {\"id\": 1e30}, {\"id\": -1}]}",
        "[{\"timestamp\": \"0:01:00\", \"topic\": \"array at top\"}]",
        "{\"confusion_points\": [{\"timestamp\": \"0:01:00\", \"topic\": \"x\"",
        "```\n{\"confusion_points\": []}\n```",
        "}{",
        "{\"confusion_points\": [{\"timestamp\": \"0:1:0\", \"topic\": \"x\"}]}",
        "{\"CONFUSION_POINTS\": [{\"TIMESTAMP\": \"0:01:00\", \"TOPIC\": \"caps\"}]}",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.push(format!("{{\"title\": \"{long}\", \"narrative\": \"n\"}}"));
    v.push(drifted_confusion());
    v.push(drifted_anecdotes());
    v.push(drifted_summary());
    v
}

/// `n` candidate questions a minute apart, texts `Candidate question {i}?`.
pub fn candidates(n: usize) -> Vec<QuestionCandidate> {
    (0..n)
        .map(|i| QuestionCandidate {
            timestamp: i as f64 * 70.0,
            speaker_guess: if i % 3 == 0 { Some(Speaker::Student) } else { None },
            text: format!("Candidate question {i}?"),
        })
        .collect()
}

/// The filter reply that keeps 11 of 46 candidates, by 1-based id.
pub const KEEP_11_OF_46: [usize; 11] = [2, 5, 9, 13, 17, 21, 26, 30, 35, 40, 44];

/// A filter reply selecting `ids`.
pub fn filter_reply(ids: &[usize]) -> String {
    json!({"questions": ids.iter().map(|id| json!({
        "id": id, "speaker": "student", "type": "conceptual", "relevance": "high"
    })).collect::<Vec<_>>()})
    .to_string()
}
