use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NavError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed navigation tree at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{node}: first page {first} is after last page {last}")]
    InvertedSpan { node: String, first: u32, last: u32 },
    #[error("{node}: the final chapter needs an explicit last_page")]
    MissingLastPage { node: String },
    #[error("{node}: page numbers must be positive")]
    NonPositivePage { node: String },
    #[error("{child} (pages {child_span}) is outside {parent} (pages {parent_span})")]
    OutsideParent {
        child: String,
        child_span: String,
        parent: String,
        parent_span: String,
    },
    #[error("{first} and {second} have overlapping page spans")]
    Overlap { first: String, second: String },
    #[error("{first} and {second} are out of page order")]
    OutOfOrder { first: String, second: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NavKind {
    Chapter,
    Section,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NavNode {
    pub kind: NavKind,
    pub number: String,
    pub title: String,
    pub first_page: u32,
    pub last_page: u32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NavNode>,
}

impl NavNode {
    pub fn contains(&self, page: u32) -> bool {
        self.first_page <= page && page <= self.last_page
    }

    fn label(&self) -> String {
        label(self.kind, &self.number)
    }
}

fn label(kind: NavKind, number: &str) -> String {
    match kind {
        NavKind::Chapter => format!("Chapter {number}"),
        NavKind::Section => format!("Section {number}"),
    }
}

/// Where a page sits in the book.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageContext {
    pub chapter_number: String,
    pub chapter_title: String,
    pub section_number: Option<String>,
    pub section_title: Option<String>,
}

impl fmt::Display for PageContext {
    /// `Chapter 7, Section 7.4 (The Molar Gibbs Energy ...)`, or
    /// `Chapter 7 (<chapter title>)` when no section applies.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.section_number, &self.section_title) {
            (Some(n), Some(t)) => write!(f, "Chapter {}, Section {} ({})", self.chapter_number, n, t),
            (Some(n), None) => write!(f, "Chapter {}, Section {}", self.chapter_number, n),
            _ => write!(f, "Chapter {} ({})", self.chapter_number, self.chapter_title),
        }
    }
}

/// The validated chapter/section tree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NavTree {
    pub chapters: Vec<NavNode>,
}

impl NavTree {
    pub fn from_json(json: &str) -> Result<Self, NavError> {
        let raw: RawTree = serde_json::from_str(json).map_err(|e| NavError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let chapters = close_siblings(raw.chapters, None, 0)?;
        let tree = NavTree { chapters };
        tree.validate()?;
        Ok(tree)
    }

    /// Checks the span invariants: `first <= last`, children inside their
    /// parent, siblings ordered and non-overlapping.
    pub fn validate(&self) -> Result<(), NavError> {
        validate_siblings(&self.chapters, None)
    }

    /// Last page covered by the book.
    pub fn max_page(&self) -> Option<u32> {
        self.chapters.iter().map(|c| c.last_page).max()
    }

    /// Resolves a page to its chapter and, when one contains it, its deepest
    /// section.
    pub fn locate_page(&self, page: u32) -> Option<PageContext> {
        let chapter = self.chapters.iter().find(|c| c.contains(page))?;
        let mut deepest: Option<&NavNode> = None;
        let mut level = &chapter.children;
        while let Some(node) = level.iter().find(|n| n.contains(page)) {
            if node.kind == NavKind::Section {
                deepest = Some(node);
            }
            level = &node.children;
        }
        Some(PageContext {
            chapter_number: chapter.number.clone(),
            chapter_title: chapter.title.clone(),
            section_number: deepest.map(|s| s.number.clone()),
            section_title: deepest.map(|s| s.title.clone()),
        })
    }
}

/// Reads and validates `ftoc_nav_tree.json`.
pub fn parse_nav_tree(path: &Path) -> Result<NavTree, NavError> {
    let json = fs::read_to_string(path).map_err(|source| NavError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    NavTree::from_json(&json)
}

#[derive(Deserialize)]
struct RawTree {
    chapters: Vec<RawNode>,
}

#[derive(Deserialize)]
struct RawNode {
    #[serde(default)]
    kind: Option<NavKind>,
    number: NumberOrString,
    title: String,
    first_page: i64,
    #[serde(default)]
    last_page: Option<i64>,
    #[serde(default, alias = "sections")]
    children: Vec<RawNode>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrString {
    Str(String),
    Num(serde_json::Number),
}

impl NumberOrString {
    fn into_string(self) -> String {
        match self {
            NumberOrString::Str(s) => s,
            NumberOrString::Num(n) => n.to_string(),
        }
    }
}

/// Converts raw siblings into nodes, closing open-ended spans: a missing
/// `last_page` ends one page before the next sibling starts, or at the
/// parent's last page for the final child. A final chapter has no parent and
/// must be explicit.
fn close_siblings(raw: Vec<RawNode>, parent_last: Option<u32>, depth: usize) -> Result<Vec<NavNode>, NavError> {
    let default_kind = if depth == 0 { NavKind::Chapter } else { NavKind::Section };
    let starts: Vec<i64> = raw.iter().map(|r| r.first_page).collect();
    let mut out = Vec::with_capacity(raw.len());
    for (i, r) in raw.into_iter().enumerate() {
        let kind = r.kind.unwrap_or(default_kind);
        let number = r.number.into_string();
        let name = label(kind, &number);
        let last = match r.last_page {
            Some(l) => l,
            None => match starts.get(i + 1) {
                Some(next) => next - 1,
                None => match parent_last {
                    Some(p) => i64::from(p),
                    None => return Err(NavError::MissingLastPage { node: name }),
                },
            },
        };
        let (Ok(first_page), Ok(last_page)) = (u32::try_from(r.first_page), u32::try_from(last)) else {
            return Err(NavError::NonPositivePage { node: name });
        };
        if first_page == 0 || last_page == 0 {
            return Err(NavError::NonPositivePage { node: name });
        }
        if first_page > last_page {
            return Err(NavError::InvertedSpan {
                node: name,
                first: first_page,
                last: last_page,
            });
        }
        let children = close_siblings(r.children, Some(last_page), depth + 1)?;
        out.push(NavNode {
            kind,
            number,
            title: r.title,
            first_page,
            last_page,
            children,
        });
    }
    Ok(out)
}

fn span(n: &NavNode) -> String {
    format!("{}-{}", n.first_page, n.last_page)
}

fn validate_siblings(nodes: &[NavNode], parent: Option<&NavNode>) -> Result<(), NavError> {
    for n in nodes {
        if n.first_page > n.last_page {
            return Err(NavError::InvertedSpan {
                node: n.label(),
                first: n.first_page,
                last: n.last_page,
            });
        }
        if let Some(p) = parent {
            if n.first_page < p.first_page || n.last_page > p.last_page {
                return Err(NavError::OutsideParent {
                    child: n.label(),
                    child_span: span(n),
                    parent: p.label(),
                    parent_span: span(p),
                });
            }
        }
    }
    for w in nodes.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.first_page < a.first_page {
            return Err(NavError::OutOfOrder {
                first: a.label(),
                second: b.label(),
            });
        }
        if b.first_page <= a.last_page {
            return Err(NavError::Overlap {
                first: a.label(),
                second: b.label(),
            });
        }
    }
    for n in nodes {
        validate_siblings(&n.children, Some(n))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CH4: &str = r#"{"chapters": [
        {"number": "4", "title": "Entropy: An Additional Balance Equation", "first_page": 100, "last_page": 160,
         "children": [
            {"number": "4.1", "title": "Entropy: A New Concept", "first_page": 100, "last_page": 115},
            {"number": "4.2", "title": "The Entropy Balance", "first_page": 116}
         ]}
    ]}"#;

    #[test]
    fn page_102_is_in_section_4_1() {
        let tree = NavTree::from_json(CH4).unwrap();
        let ctx = tree.locate_page(102).unwrap();
        assert_eq!(ctx.chapter_number, "4");
        assert_eq!(ctx.section_number.as_deref(), Some("4.1"));
        assert_eq!(ctx.section_title.as_deref(), Some("Entropy: A New Concept"));
    }

    #[test]
    fn open_section_closes_at_parent_end() {
        let tree = NavTree::from_json(CH4).unwrap();
        assert_eq!(tree.chapters[0].children[1].last_page, 160);
        assert_eq!(tree.locate_page(160).unwrap().section_number.as_deref(), Some("4.2"));
    }

    #[test]
    fn page_zero_and_past_the_end_are_not_found() {
        let tree = NavTree::from_json(CH4).unwrap();
        assert_eq!(tree.locate_page(0), None);
        assert_eq!(tree.locate_page(161), None);
    }

    #[test]
    fn chapter_without_sections_gives_chapter_only_context() {
        let tree = NavTree::from_json(
            r#"{"chapters": [{"number": 1, "title": "Introduction", "first_page": 1, "last_page": 20}]}"#,
        )
        .unwrap();
        let ctx = tree.locate_page(5).unwrap();
        assert_eq!(ctx.chapter_number, "1");
        assert_eq!(ctx.section_number, None);
        assert_eq!(ctx.to_string(), "Chapter 1 (Introduction)");
    }

    #[test]
    fn chapter_preamble_has_no_section() {
        let tree = NavTree::from_json(
            r#"{"chapters": [{"number": "7", "title": "c", "first_page": 280, "last_page": 340,
                "children": [{"number": "7.1", "title": "s", "first_page": 282, "last_page": 340}]}]}"#,
        )
        .unwrap();
        let ctx = tree.locate_page(280).unwrap();
        assert_eq!(ctx.chapter_number, "7");
        assert_eq!(ctx.section_number, None);
    }

    #[test]
    fn child_beyond_parent_is_rejected() {
        let err = NavTree::from_json(
            r#"{"chapters": [{"number": "4", "title": "c", "first_page": 100, "last_page": 160,
                "children": [{"number": "4.9", "title": "s", "first_page": 150, "last_page": 170}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, NavError::OutsideParent { .. }), "{err}");
    }

    #[test]
    fn overlapping_siblings_name_both_nodes() {
        let err = NavTree::from_json(
            r#"{"chapters": [
                {"number": "1", "title": "a", "first_page": 1, "last_page": 50},
                {"number": "2", "title": "b", "first_page": 40, "last_page": 90}]}"#,
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "Chapter 1 and Chapter 2 have overlapping page spans");
    }

    #[test]
    fn final_chapter_needs_last_page() {
        let err = NavTree::from_json(
            r#"{"chapters": [
                {"number": "1", "title": "a", "first_page": 1},
                {"number": "2", "title": "b", "first_page": 40}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, NavError::MissingLastPage { ref node } if node == "Chapter 2"));
    }

    #[test]
    fn open_chapter_closes_before_next() {
        let tree = NavTree::from_json(
            r#"{"chapters": [
                {"number": "1", "title": "a", "first_page": 1},
                {"number": "2", "title": "b", "first_page": 40, "last_page": 90}]}"#,
        )
        .unwrap();
        assert_eq!(tree.chapters[0].last_page, 39);
        assert_eq!(tree.max_page(), Some(90));
    }
}
