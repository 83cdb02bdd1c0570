//! Index search, dual-path merge and context assembly.
//!
//! Scoring is transparent on purpose so a student can see why an entry came
//! back. For each distinct term found in an entry's topic path, joined with
//! `" > "` (whole words, case-insensitive, hyphens as spaces):
//!
//! * the term's alphanumeric length is added, so longer and more specific
//!   terms weigh more;
//! * [`START_BONUS`] is added when the entry's own topic begins with the term.
//!
//! Results from the LLM path also get a page-position bonus of
//! `round(5 * (1 - first_page / max_page))`, favoring the early pages where
//! concepts are introduced.
//!
//! The two result lists are merged by taking the maximum score per entry.
//! A weighted blend would punish an entry that only one extractor found,
//! which is exactly the case the second extractor exists to cover.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::Serialize;

use crate::book_index::{BookIndex, NavTree, PageContext, PageRange};
use crate::terms::{Origin, TermSet};
use crate::text;

pub const START_BONUS: f64 = 5.0;
pub const PAGE_BONUS_MAX: u32 = 5;
pub const DEFAULT_THRESHOLD: f64 = 10.0;
pub const DEFAULT_CONTEXT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredMatch {
    pub topic_path: Vec<String>,
    pub pages: Vec<PageRange>,
    pub score: f64,
    pub origin: Origin,
    pub matched_terms: Vec<String>,
}

impl ScoredMatch {
    pub fn first_page(&self) -> Option<u32> {
        self.pages.iter().map(|p| p.first).min()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedMatch {
    pub topic_path: Vec<String>,
    pub pages: Vec<PageRange>,
    /// Highest score any extractor gave this entry.
    pub score: f64,
    pub sources: BTreeSet<Origin>,
}

impl MergedMatch {
    pub fn first_page(&self) -> Option<u32> {
        self.pages.iter().map(|p| p.first).min()
    }

    pub fn path_label(&self) -> String {
        self.topic_path.join(" > ")
    }
}

/// `round(5 * (1 - first_page / max_page))`, never negative. Computed on
/// exact fractions so that halves round up: 531 of 590 gives 1, not 0.
pub fn page_bonus(first_page: u32, max_page: u32) -> f64 {
    if max_page == 0 || first_page >= max_page {
        return 0.0;
    }
    let num = u64::from(PAGE_BONUS_MAX) * u64::from(max_page - first_page);
    let den = u64::from(max_page);
    ((2 * num + den) / (2 * den)) as f64
}

/// Scores every index entry against `terms`. Entries without pages are
/// returned too; [`filter_and_order`] drops them.
pub fn search_index(terms: &TermSet, index: &BookIndex, nav: &NavTree) -> Vec<ScoredMatch> {
    if terms.is_empty() {
        return Vec::new();
    }
    let term_tokens: Vec<(&String, Vec<String>)> = terms.terms().iter().map(|t| (t, text::words(t))).collect();
    let max_page = nav.max_page().or_else(|| index.max_page()).unwrap_or(1);

    let mut out = Vec::new();
    for entry in index.iter() {
        let own = text::words(&entry.topic);
        let path = entry.topic_path();
        let path_words = text::words(&path.join(" > "));
        let mut score = 0.0;
        let mut matched = Vec::new();
        for (term, tokens) in &term_tokens {
            if text::count_subsequence(&path_words, tokens) == 0 {
                continue;
            }
            score += text::alnum_len(term) as f64;
            if own.starts_with(tokens) {
                score += START_BONUS;
            }
            matched.push((*term).clone());
        }
        if matched.is_empty() {
            continue;
        }
        if terms.origin == Origin::Llm {
            if let Some(fp) = entry.first_page() {
                score += page_bonus(fp, max_page);
            }
        }
        out.push(ScoredMatch {
            topic_path: path,
            pages: entry.pages.clone(),
            score,
            origin: terms.origin,
            matched_terms: matched,
        });
    }
    out
}

/// Merges the two result lists, keyed by (topic path, first page). Each
/// merged entry carries the maximum of its per-path scores.
pub fn merge_max(pattern: &[ScoredMatch], llm: &[ScoredMatch]) -> Vec<MergedMatch> {
    let mut merged: IndexMap<(Vec<String>, Option<u32>), MergedMatch> = IndexMap::new();
    for m in pattern.iter().chain(llm) {
        let key = (m.topic_path.clone(), m.first_page());
        merged
            .entry(key)
            .and_modify(|e| {
                e.score = e.score.max(m.score);
                e.sources.insert(m.origin);
            })
            .or_insert_with(|| MergedMatch {
                topic_path: m.topic_path.clone(),
                pages: m.pages.clone(),
                score: m.score,
                sources: BTreeSet::from([m.origin]),
            });
    }
    merged.into_values().collect()
}

fn presentation_order(a: &MergedMatch, b: &MergedMatch) -> Ordering {
    a.first_page()
        .cmp(&b.first_page())
        .then_with(|| b.score.total_cmp(&a.score))
        .then_with(|| a.topic_path.cmp(&b.topic_path))
}

/// Drops matches below `threshold` or without pages, then orders by first
/// page, score (descending) and topic path.
pub fn filter_and_order(matches: Vec<MergedMatch>, threshold: f64) -> Vec<MergedMatch> {
    let mut kept: Vec<MergedMatch> = matches
        .into_iter()
        .filter(|m| m.score >= threshold && !m.pages.is_empty())
        .collect();
    kept.sort_by(presentation_order);
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextEntry {
    pub rank: usize,
    pub topic_path: Vec<String>,
    pub pages: Vec<PageRange>,
    pub location: Option<PageContext>,
}

impl ContextEntry {
    pub fn path_label(&self) -> String {
        self.topic_path.join(" > ")
    }

    /// `958--962`, `314--317, 440--442` or `320`.
    pub fn pages_label(&self) -> String {
        render_pages(&self.pages)
    }

    /// Every page number the entry covers.
    pub fn page_numbers(&self) -> impl Iterator<Item = u32> + '_ {
        self.pages.iter().flat_map(|r| r.first..=r.last)
    }
}

pub fn render_pages(pages: &[PageRange]) -> String {
    pages.iter().map(PageRange::to_string).collect::<Vec<_>>().join(", ")
}

fn pages_word(pages: &[PageRange]) -> &'static str {
    match pages {
        [single] if single.first == single.last => "page",
        _ => "pages",
    }
}

/// The numbered entries handed to the answering model.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ContextBlock {
    pub entries: Vec<ContextEntry>,
    pub rendered_text: String,
}

impl ContextBlock {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Takes the first `k` matches (already filtered and ordered) and renders
/// them with their chapter and section:
///
/// ```text
/// 1. Entropy > Entropy generation (pages 958--962)
///    Location: Chapter 15, Section 15.7 (Thermodynamic Analysis of Bioreactors)
/// ```
pub fn assemble_context(matches: &[MergedMatch], nav: &NavTree, k: usize) -> ContextBlock {
    let entries: Vec<ContextEntry> = matches
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, m)| ContextEntry {
            rank: i + 1,
            topic_path: m.topic_path.clone(),
            pages: m.pages.clone(),
            location: m.first_page().and_then(|p| nav.locate_page(p)),
        })
        .collect();
    let rendered_text = entries
        .iter()
        .map(|e| {
            let location = e
                .location
                .as_ref()
                .map_or_else(|| "unknown".to_string(), PageContext::to_string);
            format!(
                "{}. {} ({} {})\n   Location: {}",
                e.rank,
                e.path_label(),
                pages_word(&e.pages),
                e.pages_label(),
                location
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    ContextBlock { entries, rendered_text }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(a: u32, b: u32) -> PageRange {
        PageRange::new(a, b).unwrap()
    }

    fn scored(path: &[&str], first: u32, score: f64, origin: Origin) -> ScoredMatch {
        ScoredMatch {
            topic_path: path.iter().map(|s| s.to_string()).collect(),
            pages: vec![pr(first, first + 1)],
            score,
            origin,
            matched_terms: vec!["x".into()],
        }
    }

    fn nav() -> NavTree {
        NavTree::from_json(
            r#"{"chapters": [
                {"number": "7", "title": "Equilibrium", "first_page": 280, "last_page": 340, "children": [
                    {"number": "7.4", "title": "The Molar Gibbs Energy and Fugacity of a Pure Component", "first_page": 310, "last_page": 330}]},
                {"number": "15", "title": "Biochemical", "first_page": 900, "last_page": 1000, "children": [
                    {"number": "15.7", "title": "Thermodynamic Analysis of Bioreactors", "first_page": 950, "last_page": 1000}]}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn fugacity_against_liquids_entry_scores_13() {
        let idx = BookIndex::from_json(
            r#"[{"topic": "Liquid(s)", "subtopics": [{"topic": "fugacity of", "pages": [[316, 317]]}]}]"#,
        )
        .unwrap();
        let terms = TermSet::new(Origin::Pattern, ["fugacity"]);
        let hits = search_index(&terms, &idx, &nav());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].topic_path, ["Liquid(s)", "fugacity of"]);
        assert_eq!(hits[0].score, 13.0);
        assert_eq!(hits[0].matched_terms, ["fugacity"]);
    }

    #[test]
    fn no_terms_no_matches() {
        let idx = BookIndex::from_json(r#"[{"topic": "fugacity", "pages": [3]}]"#).unwrap();
        assert!(search_index(&TermSet::empty(Origin::Llm), &idx, &nav()).is_empty());
    }

    #[test]
    fn page_bonus_is_zero_at_the_last_page() {
        assert_eq!(page_bonus(1000, 1000), 0.0);
        assert_eq!(page_bonus(2000, 1000), 0.0);
        assert_eq!(page_bonus(1, 1000), 5.0);
        assert_eq!(page_bonus(531, 590), 1.0);
        assert_eq!(page_bonus(900, 1000), 1.0);
        let idx = BookIndex::from_json(r#"[{"topic": "fugacity", "pages": [1000]}]"#).unwrap();
        let hits = search_index(&TermSet::new(Origin::Llm, ["fugacity"]), &idx, &nav());
        assert_eq!(hits[0].score, 13.0);
    }

    #[test]
    fn word_boundaries_are_respected() {
        let idx = BookIndex::from_json(r#"[{"topic": "Isentropic process", "pages": [40]}]"#).unwrap();
        assert!(search_index(&TermSet::new(Origin::Pattern, ["entropic"]), &idx, &nav()).is_empty());
    }

    #[test]
    fn single_path_match_keeps_full_score() {
        let merged = merge_max(&[scored(&["fugacity coefficient"], 314, 21.0, Origin::Pattern)], &[]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].score, 21.0);
    }

    #[test]
    fn overlapping_keys_take_the_max() {
        let merged = merge_max(
            &[scored(&["a"], 10, 10.0, Origin::Pattern)],
            &[scored(&["a"], 10, 15.0, Origin::Llm)],
        );
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].score, 15.0);
        assert_eq!(merged[0].sources, BTreeSet::from([Origin::Pattern, Origin::Llm]));
    }

    #[test]
    fn disjoint_keys_concatenate() {
        let merged = merge_max(
            &[scored(&["a"], 10, 12.0, Origin::Pattern)],
            &[scored(&["a"], 20, 14.0, Origin::Llm)],
        );
        assert_eq!(merged.iter().map(|m| m.score).collect::<Vec<_>>(), [12.0, 14.0]);
    }

    #[test]
    fn threshold_and_page_order() {
        let merged = merge_max(
            &[
                scored(&["late"], 424, 13.0, Origin::Pattern),
                scored(&["low"], 100, 6.3, Origin::Pattern),
                scored(&["early"], 314, 13.0, Origin::Pattern),
            ],
            &[],
        );
        let kept = filter_and_order(merged, DEFAULT_THRESHOLD);
        let firsts: Vec<_> = kept.iter().map(|m| m.first_page().unwrap()).collect();
        assert_eq!(firsts, [314, 424]);
        assert!(filter_and_order(Vec::new(), 10.0).is_empty());
    }

    #[test]
    fn pageless_entries_are_excluded() {
        let mut m = merge_max(&[scored(&["a"], 10, 50.0, Origin::Pattern)], &[]);
        m[0].pages.clear();
        assert!(filter_and_order(m, 0.0).is_empty());
    }

    #[test]
    fn context_rendering_matches_the_documented_format() {
        let m = MergedMatch {
            topic_path: vec!["Entropy".into(), "Entropy generation".into()],
            pages: vec![pr(958, 962)],
            score: 30.0,
            sources: BTreeSet::from([Origin::Llm]),
        };
        let ctx = assemble_context(&[m], &nav(), DEFAULT_CONTEXT_K);
        assert_eq!(
            ctx.rendered_text,
            "1. Entropy > Entropy generation (pages 958--962)\n   \
             Location: Chapter 15, Section 15.7 (Thermodynamic Analysis of Bioreactors)"
        );
    }

    #[test]
    fn context_takes_top_k_and_marks_unknown_locations() {
        let ms: Vec<MergedMatch> = (0..7)
            .map(|i| MergedMatch {
                topic_path: vec![format!("t{i}")],
                pages: vec![pr(2000 + i, 2000 + i)],
                score: 11.0,
                sources: BTreeSet::from([Origin::Pattern]),
            })
            .collect();
        let ctx = assemble_context(&ms, &nav(), 5);
        assert_eq!(ctx.entries.len(), 5);
        assert_eq!(ctx.entries[4].rank, 5);
        assert!(ctx.rendered_text.starts_with("1. t0 (page 2000)\n   Location: unknown"));
        assert_eq!(assemble_context(&[], &nav(), 5), ContextBlock::default());
    }
}
