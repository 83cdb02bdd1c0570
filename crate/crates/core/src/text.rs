//! Word-level normalization shared by term extraction, index matching and
//! term counting.
//!
//! Everything that compares words goes through [`words`], so the rules stay
//! identical across modules: lowercase, hyphens read as spaces, words are
//! maximal runs of alphanumeric characters (an apostrophe is kept when it
//! sits between two alphanumerics, as in "what's").

/// Splits `text` into normalized words.
pub fn words(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let chars: Vec<char> = lowered.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let inner_apostrophe =
            (c == '\'' || c == '\u{2019}') && !cur.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() {
            cur.push(c);
        } else if inner_apostrophe {
            cur.push('\'');
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Normalized form of a phrase: its words joined by single spaces.
pub fn normalize_phrase(text: &str) -> String {
    words(text).join(" ")
}

/// Number of alphanumeric characters in `text`.
pub fn alnum_len(text: &str) -> usize {
    text.chars().filter(|c| c.is_alphanumeric()).count()
}

/// Number of times `needle` occurs as a contiguous subsequence of `hay`.
pub(crate) fn count_subsequence(hay: &[String], needle: &[String]) -> usize {
    if needle.is_empty() || needle.len() > hay.len() {
        return 0;
    }
    hay.windows(needle.len()).filter(|w| *w == needle).count()
}

/// Collapses whitespace runs to single spaces and lowercases.
pub(crate) fn squash_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}
