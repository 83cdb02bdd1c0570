//! Instructor-facing analyses of cleaned lecture transcripts.
//!
//! Four analyses run per lecture: a structured summary, the questions asked,
//! moments of confusion, and the instructor's anecdotes and analogies.
//! Questions use two passes. The first reads the whole transcript and
//! returns every candidate with a verbatim quote; the second sees only that
//! short candidate list and picks the ones worth an instructor's attention.
//! Quotes are checked against the transcript and timestamps against its
//! length before anything is emitted.

mod corpus;
mod dedup;
mod passes;
mod records;

pub use corpus::{
    analyze_corpus, bimodal_check, load_run_report, output_path, AnalysisKind, AnalysisOptions, ItemStatus, KindTally,
    RunItem, RunReport, BIMODAL_MIN_LECTURES, BIMODAL_SHARE, RUN_REPORT_FILE,
};
pub use dedup::{dedup_confusion, DEFAULT_DEDUP_WINDOW_S};
pub use passes::{
    catalog_anecdotes, detect_confusion, extract_question_candidates, extract_questions, filter_questions,
    render_candidates, render_timed, summarize, AnalysisError, Analyzed, Grounding, MAX_QUESTIONS, PASS_THROUGH_MAX,
};
pub use records::{
    AnecdoteCategory, AnecdoteRecord, ConfusionRecord, LectureType, QuestionCandidate, QuestionRecord, QuestionType,
    Relevance, Severity, Speaker, SummaryRecord, SummaryTopic,
};
