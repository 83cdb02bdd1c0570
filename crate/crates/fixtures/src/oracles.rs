//! Slow reference implementations used as test oracles. Each one is written
//! from the definition, without reusing the library's tokenizer or scanners.

use std::collections::BTreeSet;

/// Lowercases and replaces every separator with one space, padding both
/// ends, so `" a b "` style substring tests mark word boundaries. An
/// apostrophe counts as a letter only between two alphanumerics.
pub fn padded_words(text: &str) -> String {
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut out = String::from(" ");
    for i in 0..chars.len() {
        let c = chars[i];
        let inner = (c == '\'' || c == '\u{2019}')
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() {
            out.push(c);
        } else if inner {
            out.push('\'');
        } else if !out.ends_with(' ') {
            out.push(' ');
        }
    }
    if !out.ends_with(' ') {
        out.push(' ');
    }
    out
}

/// Overlapping occurrences of `needle` in `hay`, by scanning every byte offset.
fn occurrences(hay: &str, needle: &str) -> usize {
    (0..hay.len())
        .filter(|&i| hay.is_char_boundary(i) && hay[i..].starts_with(needle))
        .count()
}

/// Whole-word occurrences of `term` in `text`; a trailing `(s)` on the term
/// also admits the plural of its last word.
pub fn count_term(text: &str, term: &str) -> usize {
    let (base, plural) = match term.trim().strip_suffix("(s)") {
        Some(b) => (b, true),
        None => (term, false),
    };
    let needle = padded_words(base);
    if needle.trim().is_empty() {
        return 0;
    }
    let hay = padded_words(text);
    let mut n = occurrences(&hay, &needle);
    if plural {
        let plural_needle = format!("{}s ", needle.trim_end());
        n += occurrences(&hay, &plural_needle);
    }
    n
}

/// Maximal runs of at least three equal trimmed strings, as
/// `(first_index, count)`, found by checking every span.
pub fn loops(texts: &[&str]) -> Vec<(usize, usize)> {
    let key: Vec<&str> = texts.iter().map(|t| t.trim()).collect();
    let n = key.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            let all_equal = key[i..=j].iter().all(|k| *k == key[i]);
            let starts = i == 0 || key[i - 1] != key[i];
            let ends = j + 1 == n || key[j + 1] != key[i];
            if all_equal && starts && ends {
                out.push((i, j - i + 1));
            }
        }
    }
    out
}

/// Index entry for [`search_scores`]: topic path and first page.
pub struct OracleEntry {
    pub path: Vec<String>,
    pub first_page: Option<u32>,
}

/// `round(5 * (1 - first / max))` clamped at zero, in integer arithmetic
/// (round half up).
pub fn page_bonus(first: u32, max: u32) -> u32 {
    if max == 0 || first >= max {
        return 0;
    }
    let (f, m) = (u64::from(first), u64::from(max));
    ((10 * (m - f) + m) / (2 * m)) as u32
}

/// Score of every entry matching at least one term, by entry position.
/// A term matches when its words appear contiguously in the entry's path;
/// it scores its alphanumeric length plus 5 when the entry's own topic
/// starts with it. LLM terms add [`page_bonus`].
pub fn search_scores(terms: &[String], entries: &[OracleEntry], llm: bool, max_page: u32) -> Vec<(usize, u32)> {
    let distinct: BTreeSet<String> = terms
        .iter()
        .map(|t| padded_words(t))
        .filter(|t| !t.trim().is_empty())
        .collect();
    let mut out = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let path = padded_words(&e.path.join(" > "));
        let own = padded_words(e.path.last().map_or("", String::as_str));
        let mut score = 0;
        let mut hit = false;
        for t in &distinct {
            if path.contains(t.as_str()) {
                hit = true;
                score += t.chars().filter(|c| c.is_alphanumeric()).count() as u32;
                if own.starts_with(t.as_str()) {
                    score += 5;
                }
            }
        }
        if hit {
            if llm {
                score += e.first_page.map_or(0, |p| page_bonus(p, max_page));
            }
            out.push((i, score));
        }
    }
    out
}
