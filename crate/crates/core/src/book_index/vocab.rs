use std::collections::HashSet;

use super::{BookIndex, PageRange};

/// Characters per token assumed when sizing a vocabulary prompt.
pub const CHARS_PER_TOKEN: usize = 4;

/// Builds a comma-separated list of index topics for an ASR vocabulary
/// prompt.
///
/// Topics whose pages intersect `window` (every topic when `None`) are
/// deduplicated case-insensitively and ordered by first page, then
/// alphabetically. Whole topics are appended while the result stays within
/// `budget_tokens * CHARS_PER_TOKEN` characters; the first topic that does not
/// fit ends the list, so a multi-word term is never cut in half.
pub fn vocabulary_prompt(index: &BookIndex, window: Option<PageRange>, budget_tokens: usize) -> String {
    let max_chars = budget_tokens.saturating_mul(CHARS_PER_TOKEN);
    let mut candidates: Vec<(u32, String, &str)> = index
        .iter()
        .filter_map(|e| {
            let first = e
                .pages
                .iter()
                .filter(|p| window.is_none_or(|w| p.intersects(&w)))
                .map(|p| p.first)
                .min()?;
            Some((first, e.topic.to_lowercase(), e.topic.as_str()))
        })
        .collect();
    candidates.sort();

    let mut seen = HashSet::new();
    let mut out = String::new();
    let mut used = 0;
    for (_, folded, topic) in candidates {
        if !seen.insert(folded) {
            continue;
        }
        let sep = if out.is_empty() { 0 } else { 2 };
        let len = topic.chars().count();
        if used + sep + len > max_chars {
            break;
        }
        if sep > 0 {
            out.push_str(", ");
        }
        out.push_str(topic);
        used += sep + len;
    }
    out
}
