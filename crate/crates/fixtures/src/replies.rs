//! Canned model replies for the sample data, plus the scripted lines of
//! lecture 9 they refer to.

use lectern::mock::Script;
use serde_json::{json, Value};

/// Lines placed into lecture 9 at fixed times (seconds).
pub const LECTURE9_LINES: &[(u32, &str)] = &[
    (20, "So what exactly does entropy measure?"),
    (37, "Entropy is not just disorder, and we will make that precise today."),
    (130, "Is this going to be on the midterm?"),
    (243, "Could the entropy of a system ever go down?"),
    (400, "A colleague of mine once defined a living thing as something that takes in energy to keep its own entropy low."),
    (570, "Why does the gas never collect in one corner by itself?"),
    (735, "Does a spontaneous process have to be fast?"),
    (942, "Wait, how can we tell which way a process will go?"),
    (1000, "Think of entropy like a messy dorm room, it only gets tidy if somebody spends energy on it."),
    (1265, "Can someone tell me what an isolated system exchanges with its surroundings?"),
    (1500, "Drop a hot steel block and a cold one into an insulated box and they end up at the same temperature, never the reverse."),
    (1660, "Is entropy conserved like energy is?"),
    (2040, "Which direction should this process run, and how would we know?"),
    (2100, "Joule spun a paddle wheel in water and showed that mechanical work warms it just like heat does."),
    (2292, "Should we write that down?"),
    (2502, "So equilibrium is when all the gradients are gone?"),
    (2704, "If work and heat are both energy, why can't we swap one for the other freely?"),
    (2760, "Turning heat into work is like pouring water through a sieve, some of it always gets away."),
    (2900, "If entropy could go down on its own, my office would clean itself."),
    (3008, "Can all of the internal energy be turned into work?"),
    (3120, "Entropy is a state function, so it does not care how you got there."),
    (3150, "Every time I make coffee I watch the cream spread out and nobody has ever seen it un-mix."),
    (3200, "Any other questions before we stop?"),
];

fn line(at: u32) -> &'static str {
    LECTURE9_LINES
        .iter()
        .find(|(t, _)| *t == at)
        .map(|(_, l)| *l)
        .expect("scripted line exists")
}

fn hms(s: u32) -> String {
    format!("{}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
}

fn pretty(v: Value) -> String {
    serde_json::to_string_pretty(&v).expect("json serializes")
}

/// Term extraction for "Explain fugacity.".
pub fn fugacity_terms() -> String {
    pretty(json!({
        "terms": ["fugacity"],
        "related": ["fugacity coefficient", "chemical potential", "activity coefficient", "ideal gas", "non-ideal gas"]
    }))
}

/// Answer text for "Explain fugacity." over the five-entry context.
pub const FUGACITY_ANSWER: &str = "Fugacity plays the role of an effective pressure that measures how strongly a \
component tends to leave its phase. The textbook introduces it together with the molar Gibbs energy in Chapter 7, \
Section 7.4, and shows how to compute the fugacity coefficient from the Peng-Robinson equation of state on pages \
314-317 and 440-442. The same section treats the fugacity coefficient from corresponding states on pages 315-316, \
the fugacity of liquids on pages 316-317 and of solids on page 320. For mixtures and phase equilibrium, continue \
with Chapter 9, Section 9.2, pages 424-425.";

/// Term extraction for "What is entropy?".
pub fn entropy_terms() -> String {
    pretty(json!({
        "terms": ["entropy"],
        "related": ["entropy change", "entropy generation", "entropy balance"]
    }))
}

pub fn lecture9_summary() -> String {
    pretty(json!({
        "title": "Entropy and the Direction of Natural Processes",
        "lecture_type": "new_material",
        "topics": [
            {"name": "What entropy measures", "description": "Entropy introduced as a property, contrasted with the everyday idea of disorder."},
            {"name": "Spontaneous change in isolated systems", "description": "Why isolated systems drift toward equilibrium on their own."},
            {"name": "Direction of processes", "description": "Using entropy to tell which way a process can run."},
            {"name": "Entropy as a state function", "description": "Entropy depends on the state only, not on the path taken."}
        ],
        "key_concepts": ["entropy", "spontaneous process", "equilibrium", "state function"],
        "key_equations": ["dS = dQ_rev / T"],
        "narrative": "The lecture introduces entropy and uses it to decide the direction of spontaneous processes, moving from everyday examples of irreversibility to entropy as a state function."
    }))
}

/// Pass-1 question candidates for lecture 9: every question line.
pub fn lecture9_candidates() -> String {
    let questions = [
        (20, "student"),
        (130, "student"),
        (243, "instructor"),
        (570, "instructor"),
        (735, "student"),
        (942, "student"),
        (1265, "instructor"),
        (1660, "student"),
        (2040, "instructor"),
        (2292, "student"),
        (2502, "student"),
        (2704, "instructor"),
        (3008, "student"),
        (3200, "instructor"),
    ];
    let candidates: Vec<Value> = questions
        .iter()
        .map(|(t, who)| json!({"timestamp": hms(*t), "speaker": who, "text": line(*t)}))
        .collect();
    pretty(json!({ "candidates": candidates }))
}

/// Pass-2 selection for lecture 9: 11 of the 14 candidates.
pub fn lecture9_filter() -> String {
    let chosen = [
        (1, "student", "conceptual", "high"),
        (3, "instructor", "socratic", "high"),
        (4, "instructor", "socratic", "medium"),
        (5, "student", "conceptual", "medium"),
        (6, "student", "conceptual", "high"),
        (7, "instructor", "clarification", "medium"),
        (8, "student", "conceptual", "high"),
        (9, "instructor", "socratic", "high"),
        (11, "student", "clarification", "high"),
        (12, "instructor", "socratic", "high"),
        (13, "student", "conceptual", "high"),
    ];
    let questions: Vec<Value> = chosen
        .iter()
        .map(|(id, s, t, r)| json!({"id": id, "speaker": s, "type": t, "relevance": r}))
        .collect();
    pretty(json!({ "questions": questions }))
}

/// Seven confusion entries for lecture 9; two describe the same moment.
pub fn lecture9_confusion() -> String {
    pretty(json!({"confusion_points": [
        {"timestamp": "0:00:37", "topic": "Entropy and disorder", "evidence": "Instructor corrects the idea that entropy simply means disorder.", "severity": "minor"},
        {"timestamp": "0:15:42", "topic": "Directionality of thermodynamic processes", "evidence": "Student asks how to tell which way a process goes.", "severity": "moderate"},
        {"timestamp": "0:16:30", "topic": "directionality of thermodynamic processes", "evidence": "Instructor repeats the explanation with a new example.", "severity": "minor"},
        {"timestamp": "0:27:40", "topic": "Whether entropy is conserved", "evidence": "Student expects entropy to be conserved like energy.", "severity": "minor"},
        {"timestamp": "0:45:04", "topic": "Work versus heat", "evidence": "Instructor reframes the difference between work and heat.", "severity": "moderate"},
        {"timestamp": "0:50:08", "topic": "Accessibility of internal energy", "evidence": "Student asks whether all internal energy can become work.", "severity": "moderate"},
        {"timestamp": "0:52:00", "topic": "Entropy as a state function", "evidence": "Instructor restates path independence several times.", "severity": "significant"}
    ]}))
}

/// Seven anecdote items for lecture 9, one with an off-list category.
pub fn lecture9_anecdotes() -> String {
    let item = |category: &str, at: u32, description: &str, topic: &str, purpose: &str| json!({"category": category, "quote": line(at), "description": description, "topic": topic, "purpose": purpose});
    pretty(json!({"items": [
        item("anecdote", 400, "A colleague's definition of a living thing.", "entropy", "Connect entropy to everyday experience."),
        item("analogy", 1000, "Messy room that needs effort to tidy.", "entropy", "Make the need for work to lower entropy intuitive."),
        item("real_world_example", 1500, "Two metal blocks reaching one temperature.", "spontaneous processes", "Show one-way heat transfer."),
        item("historical_note", 2100, "Joule's paddle wheel experiment.", "work and heat", "Ground the equivalence of work and heat."),
        item("analogy", 2760, "Sieve that always leaks.", "heat engines", "Explain why heat never fully converts to work."),
        item("joke", 2900, "Self-cleaning office.", "second law", "Keep attention while stating the second law."),
        item("metaphor", 3150, "Cream mixing into coffee.", "irreversibility", "Illustrate an irreversible process.")
    ]}))
}

/// Every reply, by file name.
pub fn all() -> Vec<(&'static str, String)> {
    vec![
        ("fugacity_terms.json", fugacity_terms() + "\n"),
        ("fugacity_answer.txt", FUGACITY_ANSWER.to_string() + "\n"),
        ("entropy_terms.json", entropy_terms() + "\n"),
        ("lecture9_summary.json", lecture9_summary() + "\n"),
        ("lecture9_candidates.json", lecture9_candidates() + "\n"),
        ("lecture9_filter.json", lecture9_filter() + "\n"),
        ("lecture9_confusion.json", lecture9_confusion() + "\n"),
        ("lecture9_anecdotes.json", lecture9_anecdotes() + "\n"),
    ]
}

/// Substrings of the system prompts, used to route mock requests.
pub mod route {
    pub const EXTRACTION: &str = "search terms";
    pub const SYNTHESIS: &str = "teaching assistant";
    pub const SUMMARY: &str = "summarize lecture transcripts";
    pub const CANDIDATES: &str = "find every question";
    pub const FILTER: &str = "numbered list of candidate questions";
    pub const CONFUSION: &str = "seem confused";
    pub const ANECDOTES: &str = "catalog the instructor's anecdotes";
}

/// Replays the "Explain fugacity." exchange.
pub fn fugacity_script() -> Script {
    Script::new()
        .on(route::EXTRACTION, fugacity_terms())
        .on(route::SYNTHESIS, FUGACITY_ANSWER)
}

/// Replays the four analyses of lecture 9.
pub fn lecture9_script() -> Script {
    Script::new()
        .on(route::SUMMARY, lecture9_summary())
        .on(route::CANDIDATES, lecture9_candidates())
        .on(route::FILTER, lecture9_filter())
        .on(route::CONFUSION, lecture9_confusion())
        .on(route::ANECDOTES, lecture9_anecdotes())
}

/// `[H:MM:SS] text` lines of a rendered transcript or candidate list.
fn timed_lines(prompt: &str) -> Vec<(&str, &str)> {
    prompt
        .lines()
        .filter_map(|l| {
            let l = l.trim_start_matches(|c: char| c.is_ascii_digit() || c == '.' || c == ' ');
            let rest = l.strip_prefix('[')?;
            let (ts, text) = rest.split_once("] ")?;
            Some((ts, text))
        })
        .collect()
}

/// A plausible reply to any analysis request over the sample corpus.
/// Lecture 9 gets its scripted replies; other lectures get replies built
/// from their own lines, so quotes and timestamps always check out.
pub fn corpus_reply(system: &str, prompt: &str) -> Option<String> {
    if prompt.contains(LECTURE9_LINES[0].1) {
        return lecture9_script().reply_for(system, prompt);
    }
    let lines = timed_lines(prompt);
    let exam = prompt.contains("Put your phones away");
    let reply = if system.contains(route::SUMMARY) {
        if exam {
            json!({"title": "Midterm examination", "lecture_type": "exam", "topics": [],
                   "narrative": "An exam session with only brief instructions."})
        } else {
            json!({"title": "Thermodynamics lecture", "lecture_type": "new_material",
                   "topics": [{"name": "Energy and entropy balances", "description": "Worked through on the board."}],
                   "key_concepts": ["entropy", "enthalpy"],
                   "narrative": "The lecture develops balances step by step."})
        }
    } else if system.contains(route::CANDIDATES) {
        let candidates: Vec<Value> = lines
            .iter()
            .step_by(37)
            .take(6 + lines.len() % 9)
            .map(|(ts, text)| json!({"timestamp": ts, "speaker": "instructor", "text": text}))
            .collect();
        json!({ "candidates": candidates })
    } else if system.contains(route::FILTER) {
        let n = lines.len();
        let keep = (n * 2 / 3).max(1).min(n);
        let questions: Vec<Value> = (1..=keep)
            .map(|id| json!({"id": id, "speaker": "instructor", "type": "socratic", "relevance": "medium"}))
            .collect();
        json!({ "questions": questions })
    } else if system.contains(route::CONFUSION) {
        let points: Vec<Value> = lines
            .iter()
            .step_by(151)
            .take(3)
            .map(|(ts, _)| json!({"timestamp": ts, "topic": "Sign convention for work", "evidence": "Re-explained.", "severity": "minor"}))
            .collect();
        json!({ "confusion_points": points })
    } else if system.contains(route::ANECDOTES) {
        let items: Vec<Value> = lines
            .iter()
            .skip(5)
            .take(1)
            .map(|(_, text)| json!({"category": "real_world_example", "quote": text, "description": "Example from practice."}))
            .collect();
        json!({ "items": items })
    } else {
        return None;
    };
    Some(reply.to_string())
}
