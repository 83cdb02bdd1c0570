//! The textbook's back-of-book index and table-of-contents tree.
//!
//! The index (`bindex_tab.json`) is the retrieval substrate: a forest of
//! topics with page references and nested subtopics. The TOC tree
//! (`ftoc_nav_tree.json`) maps page numbers back to chapters and sections so
//! that a bare page reference can be shown with its location in the book.

mod entries;
mod nav;
mod vocab;

pub use entries::{parse_index, BookIndex, IndexEntry, IndexError, PageRange, MAX_INDEX_DEPTH};
pub use nav::{parse_nav_tree, NavError, NavKind, NavNode, NavTree, PageContext};
pub use vocab::{vocabulary_prompt, CHARS_PER_TOKEN};
