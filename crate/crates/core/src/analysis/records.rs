use std::fmt;

use serde::{Deserialize, Serialize};

/// Lower-cased, with spaces and hyphens folded to underscores.
pub(crate) fn label_key(raw: &str) -> String {
    raw.trim()
        .to_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '-' { '_' } else { c })
        .collect()
}

macro_rules! label_enum {
    ($name:ident { $($variant:ident => $label:literal $(| $alt:literal)*),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }

            /// Parses a model-written label; `None` when it is not in the set.
            pub fn from_label(raw: &str) -> Option<Self> {
                match label_key(raw).as_str() {
                    $($label $(| $alt)* => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

label_enum!(LectureType {
    NewMaterial => "new_material" | "new" | "lecture",
    Review => "review",
    ProblemSolving => "problem_solving" | "problems" | "worked_examples",
    Exam => "exam" | "examination" | "quiz" | "test",
    Other => "other",
});

label_enum!(Speaker {
    Student => "student",
    Instructor => "instructor" | "professor" | "teacher" | "lecturer",
});

label_enum!(QuestionType {
    Conceptual => "conceptual",
    Clarification => "clarification" | "clarifying",
    Procedural => "procedural",
    Socratic => "socratic" | "rhetorical",
});

label_enum!(Relevance {
    Low => "low",
    Medium => "medium" | "moderate",
    High => "high",
});

label_enum!(Severity {
    Minor => "minor" | "low",
    Moderate => "moderate" | "medium",
    Significant => "significant" | "high" | "major" | "severe",
});

label_enum!(AnecdoteCategory {
    Anecdote => "anecdote",
    Analogy => "analogy",
    Joke => "joke" | "humor",
    RealWorldExample => "real_world_example" | "example" | "real_world",
    Demonstration => "demonstration" | "demo",
    HistoricalNote => "historical_note" | "history" | "historical",
    Story => "story",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTopic {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub title: String,
    pub lecture_type: LectureType,
    pub topics: Vec<SummaryTopic>,
    pub key_concepts: Vec<String>,
    pub key_equations: Vec<String>,
    pub narrative: String,
}

/// A pass-1 question candidate: a verbatim quote found in the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionCandidate {
    /// Seconds from the start of the lecture.
    pub timestamp: f64,
    pub speaker_guess: Option<Speaker>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub timestamp: f64,
    pub speaker: Speaker,
    pub qtype: QuestionType,
    pub relevance: Relevance,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionRecord {
    pub timestamp: f64,
    pub topic: String,
    pub evidence: String,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnecdoteRecord {
    pub category: AnecdoteCategory,
    pub quote: String,
    pub description: String,
    pub topic: String,
    pub purpose: String,
}
