//! Turning a free-text question into index search terms.
//!
//! Two extractors run side by side. The pattern extractor is deterministic:
//! it recognizes multi-word phrases from a lexicon (longest match first) and
//! keeps the remaining non-stopwords. The LLM extractor asks the model for
//! the terms plus related concepts, which is how "entropy" grows into
//! "entropy change" and "entropy balance". When the model is unreachable or
//! its output cannot be decoded, callers fall back to the pattern terms.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{generate_structured, Element, FieldKind, FieldSpec, GenerateRequest, LanguageModel, SchemaSpec};
use crate::text;

pub const BUILTIN_LEXICON: &str = include_str!("../data/lexicon.txt");
pub const BUILTIN_STOPWORDS: &str = include_str!("../data/stopwords.txt");

pub const EXTRACTION_TEMPERATURE: f64 = 0.2;

const EXTRACTION_SYSTEM: &str = "You extract search terms for looking up a student's question in a \
textbook's back-of-book index. List the technical terms the question names, then up to five closely \
related concepts that such an index would also list. Use lowercase. Do not answer the question. \
Reply with JSON only, in this shape: {\"terms\": [\"...\"], \"related\": [\"...\"]}";

/// Which extractor produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Pattern,
    Llm,
}

/// Lowercased, deduplicated search terms in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermSet {
    terms: Vec<String>,
    pub origin: Origin,
    /// The model added related concepts beyond the literal terms.
    pub expanded: bool,
}

impl TermSet {
    /// Normalizes each term (lowercase, hyphens as spaces, single spacing)
    /// and drops empties and repeats.
    pub fn new<I, S>(origin: Origin, terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let terms = terms
            .into_iter()
            .map(|t| text::normalize_phrase(t.as_ref()))
            .filter(|t| !t.is_empty() && seen.insert(t.clone()))
            .collect();
        TermSet {
            terms,
            origin,
            expanded: false,
        }
    }

    pub fn empty(origin: Origin) -> Self {
        Self::new(origin, std::iter::empty::<&str>())
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.iter().any(|t| t == term)
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {phrase:?} is not a multi-word phrase")]
    SingleWord { line: usize, phrase: String },
}

/// Known multi-word phrases and the stopword list.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseLexicon {
    /// Tokenized phrases, longest first.
    phrases: Vec<Vec<String>>,
    stopwords: HashSet<String>,
}

/// Non-comment, non-blank lines of a list file with their line numbers.
fn list_lines(body: &str) -> impl Iterator<Item = (usize, &str)> {
    body.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or_default().trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

impl PhraseLexicon {
    /// Parses a lexicon file and a stopword file (one entry per line, `#`
    /// starts a comment).
    pub fn from_texts(lexicon: &str, stopwords: &str) -> Result<Self, LexiconError> {
        let mut phrases = Vec::new();
        for (line, phrase) in list_lines(lexicon) {
            let tokens = text::words(phrase);
            if tokens.len() < 2 {
                return Err(LexiconError::SingleWord {
                    line,
                    phrase: phrase.into(),
                });
            }
            if !phrases.contains(&tokens) {
                phrases.push(tokens);
            }
        }
        phrases.sort_by_key(|p| std::cmp::Reverse(p.len()));
        let stopwords = list_lines(stopwords).flat_map(|(_, w)| text::words(w)).collect();
        Ok(PhraseLexicon { phrases, stopwords })
    }

    pub fn load(lexicon: &Path, stopwords: &Path) -> Result<Self, LexiconError> {
        let read = |p: &Path| {
            fs::read_to_string(p).map_err(|source| LexiconError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        Self::from_texts(&read(lexicon)?, &read(stopwords)?)
    }

    /// The lexicon and stopwords shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_texts(BUILTIN_LEXICON, BUILTIN_STOPWORDS).expect("bundled lists are valid")
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.len()
    }

    fn longest_phrase_at(&self, tokens: &[String]) -> Option<&[String]> {
        self.phrases.iter().find(|p| tokens.starts_with(p)).map(Vec::as_slice)
    }
}

/// Deterministic extraction: lexicon phrases first (longest match at each
/// position), then every remaining non-stopword as a single term.
pub fn extract_pattern(query: &str, lexicon: &PhraseLexicon) -> TermSet {
    let tokens = text::words(query);
    let mut terms = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if let Some(p) = lexicon.longest_phrase_at(&tokens[i..]) {
            terms.push(p.join(" "));
            i += p.len();
        } else {
            if !lexicon.is_stopword(&tokens[i]) {
                terms.push(tokens[i].clone());
            }
            i += 1;
        }
    }
    TermSet::new(Origin::Pattern, terms)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("LLM term extraction unavailable: {reason}")]
pub struct ExtractionUnavailable {
    pub reason: String,
}

fn extraction_schema() -> SchemaSpec {
    SchemaSpec::new(vec![
        FieldSpec::required("terms", FieldKind::Array(Element::String))
            .alias("search_terms")
            .alias("keywords"),
        FieldSpec::optional("related", FieldKind::Array(Element::String))
            .alias("related_concepts")
            .alias("related_terms"),
    ])
}

/// Asks the model for search terms and related concepts.
///
/// Any failure, transport or decoding, yields [`ExtractionUnavailable`] and
/// no partial result.
pub fn extract_llm(query: &str, model: &dyn LanguageModel) -> Result<TermSet, ExtractionUnavailable> {
    let req = GenerateRequest::new(EXTRACTION_SYSTEM, format!("Question: {query}"))
        .json()
        .temperature(EXTRACTION_TEMPERATURE);
    let out = generate_structured(model, &req, &extraction_schema())
        .map_err(|e| ExtractionUnavailable { reason: e.to_string() })?;
    let strings = |name: &str| -> Vec<String> {
        out.decoded
            .array_field(name)
            .iter()
            .filter_map(|v| v.as_str().map(str::to_string))
            .collect()
    };
    let terms = strings("terms");
    let related = strings("related");
    let expanded = related.iter().any(|r| !text::normalize_phrase(r).is_empty());
    let mut set = TermSet::new(Origin::Llm, terms.into_iter().chain(related));
    set.expanded = expanded;
    Ok(set)
}
