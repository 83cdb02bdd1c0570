use std::collections::HashSet;

use serde_json::{Map, Value};
use thiserror::Error;

use super::dedup::dedup_confusion;
use super::records::*;
use crate::llm::{
    format_timestamp, generate_structured, validate_timestamp, DecodeNote, Element, FieldKind, FieldSpec,
    GenerateRequest, LanguageModel, SchemaSpec, StructuredError, StructuredOutput, ANALYSIS_TEMPERATURE,
};
use crate::text::squash_whitespace;
use crate::transcript::Transcript;

/// Upper bound on questions kept by the second pass.
pub const MAX_QUESTIONS: usize = 15;
/// At or below this many candidates, every candidate is kept.
pub const PASS_THROUGH_MAX: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("lecture {lecture_id}: transcript has no segments")]
    EmptyTranscript { lecture_id: String },
    #[error("{message}")]
    Untimed { lecture_id: String, message: String },
    #[error("lecture {lecture_id}: {source}")]
    Model {
        lecture_id: String,
        #[source]
        source: StructuredError,
    },
    #[error("lecture {lecture_id}: {detail}")]
    Invalid { lecture_id: String, detail: String },
}

impl AnalysisError {
    pub fn is_unavailable(&self) -> bool {
        matches!(self, AnalysisError::Model { source, .. } if source.is_unavailable())
    }

    pub fn lecture_id(&self) -> &str {
        match self {
            AnalysisError::EmptyTranscript { lecture_id }
            | AnalysisError::Untimed { lecture_id, .. }
            | AnalysisError::Model { lecture_id, .. }
            | AnalysisError::Invalid { lecture_id, .. } => lecture_id,
        }
    }
}

/// Records from one analysis plus every tolerance applied on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Analyzed<T> {
    pub records: Vec<T>,
    pub notes: Vec<DecodeNote>,
    /// Model calls made, re-prompts included.
    pub calls: usize,
}

impl<T> Analyzed<T> {
    fn empty() -> Self {
        Analyzed {
            records: Vec::new(),
            notes: Vec::new(),
            calls: 0,
        }
    }
}

fn require_segments(t: &Transcript) -> Result<(), AnalysisError> {
    if t.segments.is_empty() {
        return Err(AnalysisError::EmptyTranscript {
            lecture_id: t.lecture_id.clone(),
        });
    }
    Ok(())
}

fn require_timed(t: &Transcript) -> Result<(), AnalysisError> {
    require_segments(t)?;
    t.require_timed().map_err(|e| AnalysisError::Untimed {
        lecture_id: t.lecture_id.clone(),
        message: e.to_string(),
    })
}

fn call(
    model: &dyn LanguageModel,
    lecture_id: &str,
    system: &str,
    prompt: String,
    schema: &SchemaSpec,
) -> Result<StructuredOutput, AnalysisError> {
    let req = GenerateRequest::new(system, prompt)
        .json()
        .temperature(ANALYSIS_TEMPERATURE);
    generate_structured(model, &req, schema).map_err(|source| AnalysisError::Model {
        lecture_id: lecture_id.to_string(),
        source,
    })
}

/// One line per segment, prefixed with its start time: `[0:15:42] text`.
pub fn render_timed(t: &Transcript) -> String {
    t.segments
        .iter()
        .map(|s| format!("[{}] {}", format_timestamp(s.start), s.text.trim()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn s(rec: &Map<String, Value>, name: &str) -> String {
    rec.get(name)
        .and_then(Value::as_str)
        .unwrap_or_default()
        .trim()
        .to_string()
}

fn strings(rec: &Map<String, Value>, name: &str) -> Vec<String> {
    rec.get(name)
        .and_then(Value::as_array)
        .map(|a| {
            a.iter()
                .filter_map(Value::as_str)
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect()
        })
        .unwrap_or_default()
}

fn objects<'a>(rec: &'a Map<String, Value>, name: &str) -> impl Iterator<Item = &'a Map<String, Value>> {
    rec.get(name)
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(Value::as_object)
}

fn dropped(notes: &mut Vec<DecodeNote>, detail: String) {
    log::info!("{detail}");
    notes.push(DecodeNote::Dropped { detail });
}

/// Whitespace-normalized, case-insensitive containment.
pub struct Grounding {
    haystack: String,
}

impl Grounding {
    pub fn new(t: &Transcript) -> Self {
        Grounding {
            haystack: squash_whitespace(&t.full_text()),
        }
    }

    /// The quote with wrapping quotation marks removed, if it occurs in the
    /// transcript.
    pub fn check(&self, quote: &str) -> Option<String> {
        let q = quote
            .trim()
            .trim_matches(|c| matches!(c, '"' | '\u{201c}' | '\u{201d}' | '\''))
            .trim();
        let needle = squash_whitespace(q);
        (!needle.is_empty() && self.haystack.contains(&needle)).then(|| q.to_string())
    }
}

const SUMMARY_SYSTEM: &str = "You summarize lecture transcripts from an engineering course for the \
instructor. Read the whole transcript and reply with JSON only, using these fields: \"title\" (a short \
descriptive title), \"lecture_type\" (one of new_material, review, problem_solving, exam, other), \
\"topics\" (a list of objects with \"name\" and \"description\"), \"key_concepts\" (a list of strings), \
\"key_equations\" (a list of strings) and \"narrative\" (one paragraph describing how the lecture unfolds). \
An exam session with little speech may have an empty topic list.";

fn summary_schema() -> SchemaSpec {
    SchemaSpec::new(vec![
        FieldSpec::required("title", FieldKind::String).alias("lecture_title"),
        FieldSpec::optional("lecture_type", FieldKind::String).alias("type"),
        FieldSpec::optional(
            "topics",
            FieldKind::Array(Element::Object(vec![
                FieldSpec::required("name", FieldKind::String)
                    .alias("topic")
                    .alias("title"),
                FieldSpec::optional("description", FieldKind::String)
                    .alias("notes")
                    .alias("summary"),
            ])),
        ),
        FieldSpec::optional("key_concepts", FieldKind::Array(Element::String)).alias("concepts"),
        FieldSpec::optional("key_equations", FieldKind::Array(Element::String)).alias("equations"),
        FieldSpec::required("narrative", FieldKind::String)
            .alias("summary")
            .alias("overview"),
    ])
}

/// One summary record for the lecture.
pub fn summarize(t: &Transcript, model: &dyn LanguageModel) -> Result<Analyzed<SummaryRecord>, AnalysisError> {
    require_segments(t)?;
    let out = call(
        model,
        &t.lecture_id,
        SUMMARY_SYSTEM,
        format!("Transcript:\n{}", t.full_text()),
        &summary_schema(),
    )?;
    let mut notes = out.notes();
    let rec = &out.decoded.record;
    let raw_type = s(rec, "lecture_type");
    let lecture_type = LectureType::from_label(&raw_type).unwrap_or_else(|| {
        notes.push(DecodeNote::Repaired {
            detail: format!("lecture_type {raw_type:?} mapped to other"),
        });
        LectureType::Other
    });
    let record = SummaryRecord {
        title: s(rec, "title"),
        lecture_type,
        topics: objects(rec, "topics")
            .map(|o| SummaryTopic {
                name: s(o, "name"),
                description: s(o, "description"),
            })
            .filter(|t| !t.name.is_empty())
            .collect(),
        key_concepts: strings(rec, "key_concepts"),
        key_equations: strings(rec, "key_equations"),
        narrative: s(rec, "narrative"),
    };
    let invalid = |detail: &str| AnalysisError::Invalid {
        lecture_id: t.lecture_id.clone(),
        detail: detail.into(),
    };
    if record.title.is_empty() {
        return Err(invalid("summary has an empty title"));
    }
    if record.narrative.is_empty() {
        return Err(invalid("summary has an empty narrative"));
    }
    if record.topics.is_empty() && record.lecture_type != LectureType::Exam {
        return Err(invalid("summary lists no topics for a non-exam lecture"));
    }
    Ok(Analyzed {
        records: vec![record],
        notes,
        calls: out.exchanges.len(),
    })
}

const CANDIDATE_SYSTEM: &str = "You read lecture transcripts and find every question that is asked, \
whether by a student or by the instructor, including rhetorical ones. Each transcript line starts with \
its time in brackets. For every question give \"timestamp\" (the bracketed time of its line, copied \
exactly), \"speaker\" (student or instructor, your best guess) and \"text\" (the question copied word \
for word from the transcript). Reply with JSON only: an object with a \"candidates\" list.";

fn candidate_schema() -> SchemaSpec {
    SchemaSpec::new(vec![FieldSpec::required(
        "candidates",
        FieldKind::Array(Element::Object(vec![
            FieldSpec::required("timestamp", FieldKind::Timestamp).alias("time"),
            FieldSpec::optional("speaker", FieldKind::String).alias("speaker_guess"),
            FieldSpec::required("text", FieldKind::String)
                .alias("quote")
                .alias("question"),
        ])),
    )
    .alias("questions")])
}

/// Pass 1: every question in the lecture, verbatim. Candidates whose quote
/// is not in the transcript or whose timestamp is out of range are dropped.
pub fn extract_question_candidates(
    t: &Transcript,
    model: &dyn LanguageModel,
) -> Result<Analyzed<QuestionCandidate>, AnalysisError> {
    require_timed(t)?;
    let out = call(
        model,
        &t.lecture_id,
        CANDIDATE_SYSTEM,
        format!("Transcript:\n{}", render_timed(t)),
        &candidate_schema(),
    )?;
    let mut notes = out.notes();
    let grounding = Grounding::new(t);
    let duration = t.duration();
    let mut records = Vec::new();
    for (i, o) in objects(&out.decoded.record, "candidates").enumerate() {
        let Some(text) = grounding.check(&s(o, "text")) else {
            dropped(&mut notes, format!("candidates[{i}]: quote not found in transcript"));
            continue;
        };
        let timestamp = match validate_timestamp(&s(o, "timestamp"), duration) {
            Ok(ts) => ts,
            Err(e) => {
                dropped(&mut notes, format!("candidates[{i}]: {e}"));
                continue;
            }
        };
        records.push(QuestionCandidate {
            timestamp,
            speaker_guess: Speaker::from_label(&s(o, "speaker")),
            text,
        });
    }
    Ok(Analyzed {
        records,
        notes,
        calls: out.exchanges.len(),
    })
}

const FILTER_SYSTEM: &str = "You are given a numbered list of candidate questions from one lecture, \
each with its time. Choose the 5 to 15 questions that matter most for understanding what students found \
difficult or what the instructor wanted them to think about. For each chosen question give \"id\" (its \
number in the list), \"speaker\" (student or instructor), \"type\" (conceptual, clarification, \
procedural or socratic) and \"relevance\" (high, medium or low). Reply with JSON only: an object with a \
\"questions\" list.";

fn filter_schema() -> SchemaSpec {
    SchemaSpec::new(vec![FieldSpec::required(
        "questions",
        FieldKind::Array(Element::Object(vec![
            FieldSpec::required("id", FieldKind::Integer)
                .alias("index")
                .alias("number"),
            FieldSpec::optional("speaker", FieldKind::String),
            FieldSpec::optional("type", FieldKind::String)
                .alias("qtype")
                .alias("question_type")
                .alias("category"),
            FieldSpec::optional("relevance", FieldKind::String),
        ])),
    )
    .alias("selected")])
}

/// The pass-2 prompt: numbered candidate lines and nothing else.
pub fn render_candidates(candidates: &[QuestionCandidate]) -> String {
    candidates
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{}. [{}] {}", i + 1, format_timestamp(c.timestamp), c.text))
        .collect::<Vec<_>>()
        .join("\n")
}

struct Classification {
    speaker: Option<Speaker>,
    qtype: Option<QuestionType>,
    relevance: Option<Relevance>,
}

fn to_record(c: &QuestionCandidate, cls: Option<&Classification>) -> QuestionRecord {
    QuestionRecord {
        timestamp: c.timestamp,
        speaker: cls
            .and_then(|k| k.speaker)
            .or(c.speaker_guess)
            .unwrap_or(Speaker::Student),
        qtype: cls.and_then(|k| k.qtype).unwrap_or(QuestionType::Conceptual),
        relevance: cls.and_then(|k| k.relevance).unwrap_or(Relevance::Medium),
        text: c.text.clone(),
    }
}

/// Pass 2: classifies the candidates and keeps the most significant, never
/// more than [`MAX_QUESTIONS`]. With [`PASS_THROUGH_MAX`] or fewer
/// candidates all are kept. The model sees only the candidate list.
pub fn filter_questions(
    lecture_id: &str,
    candidates: &[QuestionCandidate],
    model: &dyn LanguageModel,
) -> Result<Analyzed<QuestionRecord>, AnalysisError> {
    if candidates.is_empty() {
        return Ok(Analyzed::empty());
    }
    let pass_through = candidates.len() <= PASS_THROUGH_MAX;
    let out = match call(
        model,
        lecture_id,
        FILTER_SYSTEM,
        render_candidates(candidates),
        &filter_schema(),
    ) {
        Ok(out) => out,
        Err(e) if pass_through && !e.is_unavailable() => {
            log::warn!("{e}; keeping all {} candidates unclassified", candidates.len());
            let records = candidates.iter().map(|c| to_record(c, None)).collect();
            let mut notes = Vec::new();
            if let AnalysisError::Model {
                source: StructuredError::Decode { notes: n, .. },
                ..
            } = &e
            {
                notes.extend(n.iter().cloned());
            }
            return Ok(Analyzed {
                records,
                notes,
                calls: 2,
            });
        }
        Err(e) => return Err(e),
    };
    let mut notes = out.notes();
    let mut chosen: Vec<(usize, Classification)> = Vec::new();
    let mut seen = HashSet::new();
    for (i, o) in objects(&out.decoded.record, "questions").enumerate() {
        let id = o.get("id").and_then(Value::as_i64).unwrap_or(0);
        let idx = match usize::try_from(id) {
            Ok(n) if (1..=candidates.len()).contains(&n) => n - 1,
            _ => {
                dropped(
                    &mut notes,
                    format!("questions[{i}]: id {id} is not in the candidate list"),
                );
                continue;
            }
        };
        if !seen.insert(idx) {
            dropped(&mut notes, format!("questions[{i}]: id {id} repeated"));
            continue;
        }
        chosen.push((
            idx,
            Classification {
                speaker: Speaker::from_label(&s(o, "speaker")),
                qtype: QuestionType::from_label(&s(o, "type")),
                relevance: Relevance::from_label(&s(o, "relevance")),
            },
        ));
    }
    let records = if pass_through {
        candidates
            .iter()
            .enumerate()
            .map(|(i, c)| to_record(c, chosen.iter().find(|(k, _)| *k == i).map(|(_, cls)| cls)))
            .collect()
    } else {
        if chosen.len() > MAX_QUESTIONS {
            dropped(
                &mut notes,
                format!("{} questions selected, keeping the first {MAX_QUESTIONS}", chosen.len()),
            );
            chosen.truncate(MAX_QUESTIONS);
        }
        chosen.sort_by_key(|(i, _)| *i);
        chosen
            .iter()
            .map(|(i, cls)| to_record(&candidates[*i], Some(cls)))
            .collect()
    };
    Ok(Analyzed {
        records,
        notes,
        calls: out.exchanges.len(),
    })
}

/// Both passes.
pub fn extract_questions(t: &Transcript, model: &dyn LanguageModel) -> Result<Analyzed<QuestionRecord>, AnalysisError> {
    let pass1 = extract_question_candidates(t, model)?;
    let mut pass2 = filter_questions(&t.lecture_id, &pass1.records, model)?;
    let mut notes = pass1.notes;
    notes.append(&mut pass2.notes);
    Ok(Analyzed {
        records: pass2.records,
        notes,
        calls: pass1.calls + pass2.calls,
    })
}

const CONFUSION_SYSTEM: &str = "You read lecture transcripts and find moments where students seem \
confused or where the instructor re-explains something. Each transcript line starts with its time in \
brackets. For each moment give \"timestamp\" (the bracketed time of the line where it starts, copied \
exactly), \"topic\", \"evidence\" (what in the transcript shows it) and \"severity\" (minor, moderate or \
significant). Reply with JSON only: an object with a \"confusion_points\" list.";

fn confusion_schema() -> SchemaSpec {
    SchemaSpec::new(vec![FieldSpec::required(
        "confusion_points",
        FieldKind::Array(Element::Object(vec![
            FieldSpec::required("timestamp", FieldKind::Timestamp).alias("time"),
            FieldSpec::required("topic", FieldKind::String)
                .alias("name")
                .alias("concept"),
            FieldSpec::optional("evidence", FieldKind::String)
                .alias("description")
                .alias("notes")
                .alias("quote"),
            FieldSpec::optional("severity", FieldKind::String).alias("level"),
        ])),
    )
    .alias("confusions")
    .alias("points")
    .alias("items")])
}

/// Confusion points with validated timestamps, deduplicated over `window`
/// seconds.
pub fn detect_confusion(
    t: &Transcript,
    model: &dyn LanguageModel,
    window: f64,
) -> Result<Analyzed<ConfusionRecord>, AnalysisError> {
    require_timed(t)?;
    let out = call(
        model,
        &t.lecture_id,
        CONFUSION_SYSTEM,
        format!("Transcript:\n{}", render_timed(t)),
        &confusion_schema(),
    )?;
    let mut notes = out.notes();
    let duration = t.duration();
    let mut records = Vec::new();
    for (i, o) in objects(&out.decoded.record, "confusion_points").enumerate() {
        let timestamp = match validate_timestamp(&s(o, "timestamp"), duration) {
            Ok(ts) => ts,
            Err(e) => {
                dropped(&mut notes, format!("confusion_points[{i}]: {e}"));
                continue;
            }
        };
        let raw = s(o, "severity");
        let severity = Severity::from_label(&raw).unwrap_or_else(|| {
            notes.push(DecodeNote::Repaired {
                detail: format!("confusion_points[{i}]: severity {raw:?} mapped to moderate"),
            });
            Severity::Moderate
        });
        records.push(ConfusionRecord {
            timestamp,
            topic: s(o, "topic"),
            evidence: s(o, "evidence"),
            severity,
        });
    }
    let before = records.len();
    let records = dedup_confusion(records, window);
    if records.len() < before {
        notes.push(DecodeNote::Repaired {
            detail: format!("{} repeated confusion entries merged", before - records.len()),
        });
    }
    Ok(Analyzed {
        records,
        notes,
        calls: out.exchanges.len(),
    })
}

const ANECDOTE_SYSTEM: &str = "You read lecture transcripts and catalog the instructor's anecdotes, \
analogies, jokes, real-world examples, demonstrations and historical notes. For each item give \
\"category\" (one of anecdote, analogy, joke, real_world_example, demonstration, historical_note, story), \
\"quote\" (copied word for word from the transcript), \"description\", \"topic\" (the course topic it \
supports) and \"purpose\" (what it is meant to teach). Reply with JSON only: an object with an \"items\" list.";

fn anecdote_schema() -> SchemaSpec {
    SchemaSpec::new(vec![FieldSpec::required(
        "items",
        FieldKind::Array(Element::Object(vec![
            FieldSpec::optional("category", FieldKind::String).alias("type"),
            FieldSpec::required("quote", FieldKind::String).alias("text"),
            FieldSpec::optional("description", FieldKind::String).alias("notes"),
            FieldSpec::optional("topic", FieldKind::String).alias("related_topic"),
            FieldSpec::optional("purpose", FieldKind::String).alias("pedagogical_purpose"),
        ])),
    )
    .alias("anecdotes")
    .alias("examples")])
}

/// Anecdotes and similar material, with quotes checked against the
/// transcript. Unknown categories become `story`.
pub fn catalog_anecdotes(t: &Transcript, model: &dyn LanguageModel) -> Result<Analyzed<AnecdoteRecord>, AnalysisError> {
    require_segments(t)?;
    let body = if t.is_timed() { render_timed(t) } else { t.full_text() };
    let out = call(
        model,
        &t.lecture_id,
        ANECDOTE_SYSTEM,
        format!("Transcript:\n{body}"),
        &anecdote_schema(),
    )?;
    let mut notes = out.notes();
    let grounding = Grounding::new(t);
    let mut records = Vec::new();
    for (i, o) in objects(&out.decoded.record, "items").enumerate() {
        let Some(quote) = grounding.check(&s(o, "quote")) else {
            dropped(&mut notes, format!("items[{i}]: quote not found in transcript"));
            continue;
        };
        let raw = s(o, "category");
        let category = AnecdoteCategory::from_label(&raw).unwrap_or_else(|| {
            notes.push(DecodeNote::Repaired {
                detail: format!("items[{i}]: category {raw:?} mapped to story"),
            });
            AnecdoteCategory::Story
        });
        records.push(AnecdoteRecord {
            category,
            quote,
            description: s(o, "description"),
            topic: s(o, "topic"),
            purpose: s(o, "purpose"),
        });
    }
    Ok(Analyzed {
        records,
        notes,
        calls: out.exchanges.len(),
    })
}
