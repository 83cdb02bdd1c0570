//! One question, end to end: extract, search, merge, assemble, answer.

use serde::Serialize;
use serde_json::{json, Value};

use crate::book_index::{BookIndex, NavTree};
use crate::llm::LanguageModel;
use crate::retrieval::{
    assemble_context, filter_and_order, merge_max, search_index, ContextBlock, MergedMatch, DEFAULT_CONTEXT_K,
    DEFAULT_THRESHOLD,
};
use crate::synthesis::{fallback_answer, synthesize, AnswerMode, GroundedAnswer};
use crate::terms::{extract_llm, extract_pattern, PhraseLexicon, TermSet};

/// Everything a query needs from the textbook.
#[derive(Debug, Clone)]
pub struct Library {
    pub index: BookIndex,
    pub nav: NavTree,
    pub lexicon: PhraseLexicon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOptions {
    pub threshold: f64,
    pub context_k: usize,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            threshold: DEFAULT_THRESHOLD,
            context_k: DEFAULT_CONTEXT_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryOutcome {
    pub query: String,
    pub pattern_terms: TermSet,
    pub llm_terms: Option<TermSet>,
    pub llm_error: Option<String>,
    /// Every merged match, in presentation order, before the threshold.
    pub merged: Vec<MergedMatch>,
    pub context: ContextBlock,
    pub answer: GroundedAnswer,
}

impl QueryOutcome {
    /// Topic paths of the context entries, best first.
    pub fn top_topics(&self) -> Vec<String> {
        self.context.entries.iter().map(|e| e.path_label()).collect()
    }

    pub fn mode(&self) -> AnswerMode {
        self.answer.mode
    }

    /// The scored, merged list and the terms behind it.
    pub fn explain(&self, threshold: f64) -> Value {
        json!({
            "query": self.query,
            "terms": {
                "pattern": self.pattern_terms.terms(),
                "llm": self.llm_terms.as_ref().map(TermSet::terms),
                "llm_expanded": self.llm_terms.as_ref().is_some_and(|t| t.expanded),
                "llm_error": self.llm_error,
            },
            "threshold": threshold,
            "matches": self.merged.iter().map(|m| json!({
                "topic_path": m.topic_path,
                "pages": m.pages,
                "score": m.score,
                "sources": m.sources,
                "kept": m.score >= threshold && !m.pages.is_empty(),
            })).collect::<Vec<_>>(),
            "context": self.context.rendered_text,
        })
    }
}

/// Answers `query`. With no model, only the pattern extractor runs and the
/// answer is the deterministic fallback. With a model, both extractors run
/// concurrently; if the model fails the pattern results carry on alone.
pub fn answer_query(
    query: &str,
    library: &Library,
    model: Option<&dyn LanguageModel>,
    options: &QueryOptions,
) -> QueryOutcome {
    let (pattern_terms, llm_result) = std::thread::scope(|s| {
        let llm = model.map(|m| s.spawn(move || extract_llm(query, m)));
        let pattern = extract_pattern(query, &library.lexicon);
        let llm = llm.map(|h| h.join().expect("llm extraction thread panicked"));
        (pattern, llm)
    });
    let (llm_terms, llm_error) = match llm_result {
        None => (None, None),
        Some(Ok(t)) => (Some(t), None),
        Some(Err(e)) => {
            log::warn!("{e}; continuing with pattern terms");
            (None, Some(e.reason))
        }
    };

    let (pattern_hits, llm_hits) = std::thread::scope(|s| {
        let llm = llm_terms
            .as_ref()
            .map(|t| s.spawn(|| search_index(t, &library.index, &library.nav)));
        let pattern = search_index(&pattern_terms, &library.index, &library.nav);
        let llm = llm
            .map(|h| h.join().expect("search thread panicked"))
            .unwrap_or_default();
        (pattern, llm)
    });

    let merged = filter_and_order(merge_max(&pattern_hits, &llm_hits), f64::NEG_INFINITY);
    let kept = filter_and_order(merged.clone(), options.threshold);
    let context = assemble_context(&kept, &library.nav, options.context_k);
    let answer = match model {
        Some(m) => synthesize(query, &context, m),
        None => fallback_answer(&context),
    };
    QueryOutcome {
        query: query.to_string(),
        pattern_terms,
        llm_terms,
        llm_error,
        merged,
        context,
        answer,
    }
}
