//! Grounded textbook question answering and lecture-transcript analysis
//! over a locally served language model.
//!
//! The student-facing path turns a question into search terms (a
//! deterministic phrase extractor and an LLM extractor side by side), scores
//! them against the textbook's back-of-book index, merges the two result
//! lists by maximum score and asks the model to answer from the top five
//! entries only. The instructor-facing path cleans ASR transcripts of
//! repetition loops and runs four structured analyses over each lecture.
//!
//! See the guide in `book/` for a walk through each stage.

pub mod analysis;
pub mod book_index;
pub mod llm;
pub mod mock;
pub mod query;
pub mod report;
pub mod retrieval;
pub mod synthesis;
pub mod terms;
pub mod text;
pub mod transcript;
