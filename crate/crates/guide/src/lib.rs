//! The guide's chapters, compiled as doc comments so `cargo test` runs
//! every Rust listing in `book/src`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/transcripts.md")]
pub mod transcripts {}
#[doc = include_str!("../../../book/src/book-index.md")]
pub mod book_index {}
#[doc = include_str!("../../../book/src/retrieval.md")]
pub mod retrieval {}
#[doc = include_str!("../../../book/src/answers.md")]
pub mod answers {}
#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}
#[doc = include_str!("../../../book/src/reports.md")]
pub mod reports {}
#[doc = include_str!("../../../book/src/offline.md")]
pub mod offline {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
