//! The student-facing answer.
//!
//! Only the assembled context block is sent to the model. References are not
//! requested from the model; they are recovered by scanning its reply for page
//! numbers and topics that occur in the context, so a reference can never
//! point outside it. Chapter or section numbers in the prose that the context
//! does not contain are logged and reported in
//! [`GroundedAnswer::unverified_citations`].

use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::llm::{GenerateRequest, LanguageModel, SYNTHESIS_TEMPERATURE};
use crate::retrieval::{render_pages, ContextBlock, ContextEntry};
use crate::text;

pub const NO_MATCH_ANSWER: &str = "No matching topics found in the index.";

const SYSTEM_PROMPT: &str = "You are a teaching assistant for an undergraduate thermodynamics course. \
Answer the student's question in three to five sentences, using only the textbook index entries given \
below. Point the student to the pages where each topic is covered and give the page numbers for every \
topic you mention. Mention chapter and section numbers only as they appear in the entries; never invent \
chapters, sections, pages or topics. If the entries do not cover the question, say so.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerMode {
    Llm,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub topic: String,
    pub pages: String,
    pub chapter: Option<String>,
    pub section: Option<String>,
}

impl Reference {
    fn from_entry(e: &ContextEntry) -> Self {
        Reference {
            topic: e.path_label(),
            pages: e.pages_label(),
            chapter: e.location.as_ref().map(|l| l.chapter_number.clone()),
            section: e.location.as_ref().and_then(|l| l.section_number.clone()),
        }
    }

    fn render(&self) -> String {
        let mut line = format!("{}: pages {}", self.topic, self.pages);
        match (&self.chapter, &self.section) {
            (Some(c), Some(s)) => line.push_str(&format!(" in Chapter {c}, Section {s}")),
            (Some(c), None) => line.push_str(&format!(" in Chapter {c}")),
            _ => {}
        }
        line.push('.');
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundedAnswer {
    pub body: String,
    pub references: Vec<Reference>,
    pub mode: AnswerMode,
    /// Chapter or section citations in the reply that the context lacks.
    pub unverified_citations: Vec<String>,
}

impl GroundedAnswer {
    /// The text shown to the student: the body, followed by a references
    /// list for model answers.
    pub fn render(&self) -> String {
        if self.mode == AnswerMode::Fallback || self.references.is_empty() {
            return self.body.clone();
        }
        let refs: Vec<String> = self.references.iter().map(|r| format!("- {}", r.render())).collect();
        format!("{}\n\nReferences:\n{}", self.body, refs.join("\n"))
    }
}

/// Deterministic answer built from the top-ranked entry alone.
pub fn fallback_answer(ctx: &ContextBlock) -> GroundedAnswer {
    match ctx.entries.first() {
        None => GroundedAnswer {
            body: NO_MATCH_ANSWER.into(),
            references: Vec::new(),
            mode: AnswerMode::Fallback,
            unverified_citations: Vec::new(),
        },
        Some(top) => GroundedAnswer {
            body: format!(
                "Check out \"{}\" on pages {}.",
                top.path_label(),
                render_pages(&top.pages)
            ),
            references: vec![Reference::from_entry(top)],
            mode: AnswerMode::Fallback,
            unverified_citations: Vec::new(),
        },
    }
}

pub fn user_prompt(query: &str, ctx: &ContextBlock) -> String {
    format!(
        "Index entries:\n{}\n\nStudent question: {}",
        ctx.rendered_text,
        query.trim()
    )
}

/// Answers `query` from `ctx`. An empty context is answered without calling
/// the model; an unreachable model or an empty reply gives the fallback.
pub fn synthesize(query: &str, ctx: &ContextBlock, model: &dyn LanguageModel) -> GroundedAnswer {
    if ctx.is_empty() {
        return fallback_answer(ctx);
    }
    let req = GenerateRequest::new(SYSTEM_PROMPT, user_prompt(query, ctx)).temperature(SYNTHESIS_TEMPERATURE);
    let reply = match model.generate(&req) {
        Ok(ex) => ex.response_text,
        Err(e) => {
            log::warn!("answer generation failed, using fallback: {e}");
            return fallback_answer(ctx);
        }
    };
    let body = strip_references_trailer(&reply);
    if body.is_empty() {
        log::warn!("model returned an empty answer, using fallback");
        return fallback_answer(ctx);
    }
    let references = extract_references(&body, ctx);
    let unverified_citations = unverified_citations(&body, ctx);
    for c in &unverified_citations {
        log::warn!("answer cites {c}, which is not in the retrieved context");
    }
    GroundedAnswer {
        body,
        references,
        mode: AnswerMode::Llm,
        unverified_citations,
    }
}

/// Drops a model-written "References" section; the formatter writes its own.
fn strip_references_trailer(reply: &str) -> String {
    let mut kept = Vec::new();
    for line in reply.lines() {
        let head = line.trim().trim_start_matches(['*', '#', ' ']).to_lowercase();
        if head.starts_with("references") || head.starts_with("sources:") {
            break;
        }
        kept.push(line);
    }
    kept.join("\n").trim().to_string()
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?:\.\d+)*").expect("valid regex"))
}

fn citation_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(chapter|section|§)\s*(\d+(?:\.\d+)*)").expect("valid regex"))
}

/// Bare page-like numbers in `body`: integers not part of a dotted number
/// and not directly after "Chapter" or "Section".
fn page_numbers(body: &str) -> Vec<u32> {
    number_re()
        .find_iter(body)
        .filter(|m| !m.as_str().contains('.'))
        .filter(|m| {
            let before = body[..m.start()].trim_end().to_lowercase();
            !(before.ends_with("chapter") || before.ends_with("section") || before.ends_with('§'))
        })
        .filter(|m| {
            let prev = body[..m.start()].chars().next_back();
            let next = body[m.end()..].chars().next();
            !prev.is_some_and(char::is_alphanumeric) && !next.is_some_and(char::is_alphanumeric)
        })
        .filter_map(|m| m.as_str().parse().ok())
        .collect()
}

/// Context entries the reply refers to, by page number or by root topic.
pub fn extract_references(body: &str, ctx: &ContextBlock) -> Vec<Reference> {
    let pages = page_numbers(body);
    let body_words = text::words(body);
    ctx.entries
        .iter()
        .filter(|e| {
            let by_page = e.page_numbers().any(|p| pages.contains(&p));
            let root = e.topic_path.first().map(|t| text::words(t)).unwrap_or_default();
            by_page || text::count_subsequence(&body_words, &root) > 0
        })
        .map(Reference::from_entry)
        .collect()
}

/// Chapter and section citations in `body` that no context entry carries.
pub fn unverified_citations(body: &str, ctx: &ContextBlock) -> Vec<String> {
    let mut out = Vec::new();
    for caps in citation_re().captures_iter(body) {
        let number = &caps[2];
        let is_chapter = caps[1].eq_ignore_ascii_case("chapter");
        let known = ctx.entries.iter().filter_map(|e| e.location.as_ref()).any(|l| {
            if is_chapter {
                l.chapter_number == number
            } else {
                l.section_number.as_deref() == Some(number)
            }
        });
        let label = format!("{} {}", if is_chapter { "Chapter" } else { "Section" }, number);
        if !known && !out.contains(&label) {
            out.push(label);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::book_index::{PageContext, PageRange};
    use crate::mock::{Script, ScriptedModel};
    use crate::retrieval::ContextEntry;

    fn entry(rank: usize, path: &[&str], pages: Vec<PageRange>, ch: &str, sec: &str) -> ContextEntry {
        ContextEntry {
            rank,
            topic_path: path.iter().map(|s| s.to_string()).collect(),
            pages,
            location: Some(PageContext {
                chapter_number: ch.into(),
                chapter_title: "t".into(),
                section_number: Some(sec.into()),
                section_title: Some("s".into()),
            }),
        }
    }

    fn ctx(entries: Vec<ContextEntry>) -> ContextBlock {
        ContextBlock {
            rendered_text: "ctx".into(),
            entries,
        }
    }

    fn entropy_ctx() -> ContextBlock {
        ctx(vec![entry(
            1,
            &["Entropy", "Entropy generation"],
            vec![PageRange::new(958, 962).unwrap()],
            "15",
            "15.7",
        )])
    }

    #[test]
    fn fallback_uses_the_top_entry() {
        let a = fallback_answer(&entropy_ctx());
        assert_eq!(a.body, "Check out \"Entropy > Entropy generation\" on pages 958--962.");
        assert_eq!(a.mode, AnswerMode::Fallback);
        assert_eq!(a.render(), a.body);
    }

    #[test]
    fn single_page_fallback() {
        let c = ctx(vec![entry(
            1,
            &["Solid(s)", "fugacity of"],
            vec![PageRange::single(320).unwrap()],
            "7",
            "7.4",
        )]);
        assert_eq!(
            fallback_answer(&c).body,
            "Check out \"Solid(s) > fugacity of\" on pages 320."
        );
    }

    #[test]
    fn empty_context_never_calls_the_model() {
        let model = ScriptedModel::new(Script::new().otherwise("anything"));
        let a = synthesize("Explain fugacity.", &ContextBlock::default(), &model);
        assert_eq!(a.body, NO_MATCH_ANSWER);
        assert_eq!(model.call_count(), 0);
    }

    #[test]
    fn offline_model_falls_back() {
        let a = synthesize(
            "What is entropy generation?",
            &entropy_ctx(),
            &ScriptedModel::unavailable(),
        );
        assert_eq!(a, fallback_answer(&entropy_ctx()));
    }

    #[test]
    fn references_come_only_from_the_context() {
        let model = ScriptedModel::new(Script::new().otherwise(
            "Entropy generation is covered on pages 958-962 in Chapter 15, Section 15.7. \
             See also Chapter 3 and page 12.\n\nReferences:\n- made up, page 5",
        ));
        let a = synthesize("What is entropy generation?", &entropy_ctx(), &model);
        assert_eq!(a.mode, AnswerMode::Llm);
        assert!(!a.body.contains("made up"));
        assert_eq!(a.references.len(), 1);
        assert_eq!(a.references[0].pages, "958--962");
        assert_eq!(a.unverified_citations, ["Chapter 3"]);
        assert!(a
            .render()
            .ends_with("References:\n- Entropy > Entropy generation: pages 958--962 in Chapter 15, Section 15.7."));
        let req = &model.requests()[0];
        assert_eq!(req.temperature, Some(SYNTHESIS_TEMPERATURE));
        assert!(!req.json_mode);
    }

    #[test]
    fn chapter_numbers_are_not_page_numbers() {
        assert_eq!(
            page_numbers("Chapter 7, Section 7.4, pages 314--317 and p.320"),
            [314, 317, 320]
        );
    }
}
