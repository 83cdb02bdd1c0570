use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Deepest subtopic nesting accepted by [`parse_index`].
pub const MAX_INDEX_DEPTH: usize = 32;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed index at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("index node {node}: missing or empty topic")]
    MissingTopic { node: String },
    #[error("index node {node}: {detail}")]
    BadPage { node: String, detail: String },
    #[error("index node {node}: nested deeper than {MAX_INDEX_DEPTH} levels")]
    TooDeep { node: String },
}

/// An inclusive page span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PageRange {
    pub first: u32,
    pub last: u32,
}

impl PageRange {
    /// Returns `None` unless `1 <= first <= last`.
    pub fn new(first: u32, last: u32) -> Option<Self> {
        (first >= 1 && first <= last).then_some(PageRange { first, last })
    }

    pub fn single(page: u32) -> Option<Self> {
        Self::new(page, page)
    }

    pub fn contains(&self, page: u32) -> bool {
        self.first <= page && page <= self.last
    }

    pub fn intersects(&self, other: &PageRange) -> bool {
        self.first <= other.last && other.first <= self.last
    }
}

impl fmt::Display for PageRange {
    /// `314--317`, or just `320` for a single page.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first == self.last {
            write!(f, "{}", self.first)
        } else {
            write!(f, "{}--{}", self.first, self.last)
        }
    }
}

impl Serialize for PageRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.first)?;
        seq.serialize_element(&self.last)?;
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexEntry {
    pub topic: String,
    pub pages: Vec<PageRange>,
    pub subtopics: Vec<IndexEntry>,
    /// Topics of the enclosing entries, outermost first.
    #[serde(skip)]
    pub ancestors: Vec<String>,
}

impl IndexEntry {
    /// Root-to-self topic path.
    pub fn topic_path(&self) -> Vec<String> {
        let mut path = self.ancestors.clone();
        path.push(self.topic.clone());
        path
    }

    /// Smallest page referenced by this entry.
    pub fn first_page(&self) -> Option<u32> {
        self.pages.iter().map(|p| p.first).min()
    }
}

/// A parsed index: the top-level entries, with subtopics nested inside.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct BookIndex {
    pub roots: Vec<IndexEntry>,
}

impl BookIndex {
    pub fn from_json(json: &str) -> Result<Self, IndexError> {
        let raw: Vec<RawEntry> = serde_json::from_str(json).map_err(|e| IndexError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let roots = raw
            .into_iter()
            .enumerate()
            .map(|(i, r)| build(r, &[], i, 0))
            .collect::<Result<_, _>>()?;
        Ok(BookIndex { roots })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index serializes")
    }

    /// Every entry, depth first, parents before their subtopics.
    pub fn iter(&self) -> impl Iterator<Item = &IndexEntry> {
        let mut stack: Vec<&IndexEntry> = self.roots.iter().rev().collect();
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.subtopics.iter().rev());
            Some(next)
        })
    }

    /// Total entry count, subtopics included.
    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Largest page number referenced anywhere in the index.
    pub fn max_page(&self) -> Option<u32> {
        self.iter().flat_map(|e| e.pages.iter().map(|p| p.last)).max()
    }
}

/// Reads and validates `bindex_tab.json`.
pub fn parse_index(path: &Path) -> Result<BookIndex, IndexError> {
    let json = fs::read_to_string(path).map_err(|source| IndexError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    BookIndex::from_json(&json)
}

#[derive(Deserialize)]
struct RawEntry {
    #[serde(default)]
    topic: Option<String>,
    #[serde(default)]
    pages: Vec<RawPage>,
    #[serde(default)]
    subtopics: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPage {
    Single(i64),
    Range(Vec<i64>),
}

fn node_name(ancestors: &[String], own: &str) -> String {
    let mut parts: Vec<&str> = ancestors.iter().map(String::as_str).collect();
    parts.push(own);
    parts.join(" > ")
}

fn build(raw: RawEntry, ancestors: &[String], position: usize, depth: usize) -> Result<IndexEntry, IndexError> {
    let topic = match raw.topic.as_deref().map(str::trim) {
        Some(t) if !t.is_empty() => t.to_string(),
        _ => {
            return Err(IndexError::MissingTopic {
                node: node_name(ancestors, &format!("#{}", position + 1)),
            })
        }
    };
    if depth >= MAX_INDEX_DEPTH {
        return Err(IndexError::TooDeep {
            node: node_name(ancestors, &topic),
        });
    }
    let bad = |detail: String| IndexError::BadPage {
        node: node_name(ancestors, &topic),
        detail,
    };
    let mut pages = Vec::with_capacity(raw.pages.len());
    for p in raw.pages {
        let (first, last) = match p {
            RawPage::Single(n) => (n, n),
            RawPage::Range(v) => match v.as_slice() {
                [n] => (*n, *n),
                [a, b] => (*a, *b),
                _ => return Err(bad(format!("page range {v:?} must have one or two numbers"))),
            },
        };
        let to_page = |n: i64| u32::try_from(n).ok().filter(|&n| n >= 1);
        let range = match (to_page(first), to_page(last)) {
            (Some(a), Some(b)) => PageRange::new(a, b),
            _ => None,
        };
        pages.push(range.ok_or_else(|| bad(format!("invalid page range [{first}, {last}]")))?);
    }
    let mut path = ancestors.to_vec();
    path.push(topic.clone());
    let subtopics = raw
        .subtopics
        .into_iter()
        .enumerate()
        .map(|(i, r)| build(r, &path, i, depth + 1))
        .collect::<Result<_, _>>()?;
    Ok(IndexEntry {
        topic,
        pages,
        subtopics,
        ancestors: ancestors.to_vec(),
    })
}
