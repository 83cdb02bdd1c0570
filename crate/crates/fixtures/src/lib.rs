//! Deterministic sample data: a one-lecture baseline transcript with
//! repetition loops, a 39-lecture corpus, plain-text transcripts from a
//! second ASR system, a textbook index and navigation tree, and canned model
//! replies for offline runs.
//!
//! Everything is synthetic. [`generate`] returns the full file set keyed by
//! relative path; the `gen-fixtures` binary writes it to `fixtures/`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use lectern::transcript::{Transcript, TranscriptFile, TranscriptSegment};
use serde_json::json;

pub mod adversarial;
pub mod oracles;
pub mod replies;

/// Segment counts of the 35 full lectures, in lecture order.
const FULL_COUNTS: [usize; 35] = [
    458, 733, 611, 700, 513, 602, 691, 504, 593, 682, 495, 584, 673, 486, 575, 664, 477, 566, 655, 468, 557, 646, 459,
    548, 637, 459, 539, 628, 459, 530, 620, 709, 522, 611, 700,
];
/// Lectures that produced no segments.
pub const EMPTY_LECTURES: [u32; 2] = [3, 23];
/// Exam sessions and their segment counts.
pub const EXAM_LECTURES: [(u32, usize); 2] = [(10, 2), (25, 5)];
pub const CORPUS_LECTURES: u32 = 39;
pub const LECTURE_SECONDS: f64 = 3500.0;
pub const BASELINE_SECONDS: f64 = 3300.0;
/// Lectures with a second, plain-text transcript.
pub const COMPARISON_LECTURES: std::ops::RangeInclusive<u32> = 26..=31;

/// The baseline loops: text, repeat count, seconds covered.
pub const BASELINE_LOOPS: [(&str, usize, f64); 4] = [
    ("Elizabeth.", 37, 50.5),
    ("That's a lot.", 10, 10.2),
    ("You told me to.", 3, 10.6),
    ("Okay.", 3, 3.0),
];
pub const BASELINE_SEGMENTS: usize = 826;

pub fn lecture_id(n: u32) -> String {
    format!("{n:03}")
}

const OPENERS: [&str; 16] = [
    "So",
    "Now",
    "Okay so",
    "Right,",
    "And then",
    "Remember that",
    "Notice that",
    "Here",
    "In this case",
    "Again",
    "Next",
    "Basically",
    "Of course",
    "Look at this,",
    "Keep in mind",
    "Recall that",
];

const MIDDLES: [&str; 32] = [
    "the entropy of the system goes up",
    "the enthalpy change is what we measure",
    "a reversible path gives the maximum work",
    "the thermodynamic state is fixed by two properties",
    "the heat flows from hot to cold",
    "the gas expands against the piston",
    "the internal energy only depends on temperature here",
    "this process is irreversible",
    "the entropy balance has a generation term",
    "thermodynamics tells us the direction",
    "we integrate along the path",
    "the pressure drops across the valve",
    "the work term has a minus sign",
    "the surroundings absorb that heat",
    "the temperature is held constant",
    "the volume doubles",
    "the enthalpy of vaporization shows up",
    "the system is closed",
    "we can neglect kinetic energy",
    "the control volume is at steady state",
    "the ideal gas law applies",
    "the heat capacity is roughly constant",
    "the second law puts a bound on it",
    "the entropy change of the universe is positive",
    "a reversible engine sets the limit",
    "the thermodynamic tables give us the values",
    "the process is adiabatic",
    "the efficiency cannot beat the Carnot value",
    "the mixing is spontaneous",
    "the phase change happens at fixed temperature",
    "the flow work appears in the enthalpy",
    "the boundary moves",
];

const PREPS: [&str; 6] = [
    "as shown",
    "as written",
    "as you see",
    "as I said",
    "as drawn",
    "as computed",
];
const PLACES: [&str; 8] = [
    "on the board",
    "in the notes",
    "in the homework",
    "in the textbook",
    "on the slide",
    "in the example",
    "in the table",
    "in the figure",
];

/// Number of distinct filler sentences.
pub const FILLER_VARIETY: usize = OPENERS.len() * MIDDLES.len() * PREPS.len() * PLACES.len();

/// The `idx`-th filler sentence; distinct for distinct `idx < FILLER_VARIETY`.
pub fn filler(idx: usize) -> String {
    let idx = idx % FILLER_VARIETY;
    let a = OPENERS[idx % OPENERS.len()];
    let rest = idx / OPENERS.len();
    let b = MIDDLES[rest % MIDDLES.len()];
    let rest = rest / MIDDLES.len();
    let c = PREPS[rest % PREPS.len()];
    let d = PLACES[rest / PREPS.len()];
    format!("{a} {b}, {c} {d}.")
}

enum Block<'a> {
    Normal(usize),
    Loop(&'a str, usize, f64),
}

/// Lays blocks end to end over `duration` seconds. Loop segments share
/// their span evenly with no gaps; ordinary segments fill the rest.
fn timeline(blocks: &[Block], duration: f64, seed: usize) -> Vec<TranscriptSegment> {
    let normal: usize = blocks
        .iter()
        .map(|b| if let Block::Normal(n) = b { *n } else { 0 })
        .sum();
    let looped: f64 = blocks
        .iter()
        .map(|b| if let Block::Loop(_, _, s) = b { *s } else { 0.0 })
        .sum();
    let slot = (duration - looped) / normal.max(1) as f64;
    let mut t = 0.0;
    let mut k = 0;
    let mut out = Vec::new();
    for b in blocks {
        match b {
            Block::Normal(n) => {
                for _ in 0..*n {
                    out.push(seg(t, t + slot * 0.92, filler(seed + k)));
                    k += 1;
                    t += slot;
                }
            }
            Block::Loop(text, count, span) => {
                let each = span / *count as f64;
                for i in 0..*count {
                    out.push(seg(t + i as f64 * each, t + (i + 1) as f64 * each, (*text).to_string()));
                }
                t += span;
            }
        }
    }
    out
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn seg(start: f64, end: f64, text: String) -> TranscriptSegment {
    TranscriptSegment::new(round3(start), round3(end), text)
}

/// Puts each `(seconds, text)` line on the segment covering that time,
/// starting the segment exactly there.
fn place_lines(segments: &mut [TranscriptSegment], lines: &[(u32, &str)]) {
    for (at, text) in lines {
        let at = f64::from(*at);
        let i = segments
            .iter()
            .rposition(|s| s.start <= at)
            .expect("line falls inside the lecture");
        let next = segments.get(i + 1).map_or(f64::INFINITY, |s| s.start);
        segments[i].start = at;
        segments[i].end = segments[i].end.max(at + 1.0).min(next);
        segments[i].text = (*text).to_string();
    }
}

fn transcript_json(t: &Transcript, meta: &[(&str, &str)]) -> String {
    let mut file = TranscriptFile::from_transcript(t, None);
    for (k, v) in meta {
        file.meta.insert((*k).into(), (*v).into());
    }
    serde_json::to_string_pretty(&file).expect("transcript serializes") + "\n"
}

/// Lecture 9, recorded without loop suppression: 826 segments, four loops.
pub fn baseline_transcript() -> Transcript {
    let normal = BASELINE_SEGMENTS - BASELINE_LOOPS.iter().map(|l| l.1).sum::<usize>();
    // Loops fall at roughly 20, 31, 40 and 47 minutes.
    let cuts = [290, 440, 560, 670];
    let mut blocks = Vec::new();
    let mut prev = 0;
    for (cut, (text, count, span)) in cuts.iter().zip(BASELINE_LOOPS) {
        blocks.push(Block::Normal(cut - prev));
        blocks.push(Block::Loop(text, count, span));
        prev = *cut;
    }
    blocks.push(Block::Normal(normal - prev));
    Transcript::new("009", timeline(&blocks, BASELINE_SECONDS, 9 * 613)).expect("valid baseline")
}

/// Segment count of lecture `n` in the corpus.
pub fn corpus_count(n: u32) -> usize {
    if EMPTY_LECTURES.contains(&n) {
        return 0;
    }
    if let Some((_, c)) = EXAM_LECTURES.iter().find(|(l, _)| *l == n) {
        return *c;
    }
    let full: Vec<u32> = (1..=CORPUS_LECTURES)
        .filter(|l| !EMPTY_LECTURES.contains(l) && !EXAM_LECTURES.iter().any(|(e, _)| e == l))
        .collect();
    FULL_COUNTS[full.iter().position(|l| *l == n).expect("full lecture")]
}

const EXAM_LINES: [&str; 5] = [
    "Put your phones away and start whenever you are ready.",
    "You may use one page of notes and the steam tables.",
    "Thirty minutes left.",
    "Ten minutes left, check your units.",
    "Time is up, please bring your exams to the front.",
];

/// Lecture `n` of the semester corpus.
pub fn corpus_transcript(n: u32) -> Transcript {
    let id = lecture_id(n);
    let count = corpus_count(n);
    let segments = match n {
        _ if count == 0 => Vec::new(),
        _ if EXAM_LECTURES.iter().any(|(l, _)| *l == n) => {
            let times = if count == 2 {
                vec![30.0, 3000.0]
            } else {
                vec![30.0, 60.0, 1800.0, 2800.0, 3000.0]
            };
            let lines: Vec<&str> = if count == 2 {
                vec![EXAM_LINES[0], EXAM_LINES[4]]
            } else {
                EXAM_LINES.to_vec()
            };
            times
                .iter()
                .zip(lines)
                .map(|(t, l)| seg(*t, t + 4.0, l.to_string()))
                .collect()
        }
        30 => timeline(
            &[
                Block::Normal(300),
                Block::Loop("What?", 5, 5.0),
                Block::Normal(count - 305),
            ],
            LECTURE_SECONDS,
            30 * 613,
        ),
        _ => {
            let mut segs = timeline(&[Block::Normal(count)], LECTURE_SECONDS, n as usize * 613);
            if n == 9 {
                place_lines(&mut segs, replies::LECTURE9_LINES);
            }
            segs
        }
    };
    Transcript::new(id, segments).expect("valid corpus lecture")
}

/// The same lecture as heard by a second ASR system: a handful of dropped,
/// doubled and misheard words, exported as plain text.
pub fn second_asr_text(t: &Transcript) -> String {
    let mut words = Vec::new();
    let mut entropy_seen = 0;
    let mut reversible_seen = 0;
    for (k, w) in t.full_text().split_whitespace().enumerate() {
        if k % 150 == 7 {
            continue;
        }
        let lower = w.to_lowercase();
        if lower.starts_with("entropy") {
            entropy_seen += 1;
            if entropy_seen % 20 == 0 {
                words.push("and".to_string());
                words.push("trophy".to_string());
                continue;
            }
        }
        if lower.starts_with("reversible") {
            reversible_seen += 1;
            if reversible_seen % 9 == 0 {
                words.push("reversal".to_string());
                continue;
            }
        }
        words.push(w.to_string());
        if k % 400 == 13 {
            words.push(w.to_string());
        }
    }
    let mut out = String::new();
    let mut line = 0;
    for w in words {
        if line > 0 && line + w.len() + 1 > 78 {
            out.push('\n');
            line = 0;
        } else if line > 0 {
            out.push(' ');
            line += 1;
        }
        out.push_str(&w);
        line += w.len();
    }
    out.push('\n');
    out
}

pub const TERMS_FILE: &str = "# Domain terms counted in the ASR comparison.\n\
entropy\n\
enthalpy\n\
reversible\n\
thermodynamic(s)\n";

fn range(a: u32, b: u32) -> serde_json::Value {
    json!([a, b])
}

/// The textbook index.
pub fn index_json() -> String {
    let v = json!([
        {"topic": "Acidity of solutions", "subtopics": [
            {"topic": "buffer", "pages": [range(880, 881)]},
            {"topic": "Henderson-Hasselbalch equation", "pages": [range(882, 883)]},
            {"topic": "strong acid with strong base", "pages": [range(885, 886)]}
        ]},
        {"topic": "Activity coefficient", "pages": [range(520, 524)], "subtopics": [
            {"topic": "from excess Gibbs energy", "pages": [range(526, 528)]}
        ]},
        {"topic": "Antoine equation", "pages": [335]},
        {"topic": "Carnot cycle", "pages": [range(150, 155)]},
        {"topic": "Chemical potential", "pages": [range(430, 432)], "subtopics": [
            {"topic": "of an ideal solution", "pages": [range(470, 471)]}
        ]},
        {"topic": "Clausius-Clapeyron equation", "pages": [range(330, 333)]},
        {"topic": "Corresponding states", "pages": [range(260, 262)], "subtopics": [
            {"topic": "fugacity coefficient", "pages": [range(315, 316)]}
        ]},
        {"topic": "Enthalpy", "pages": [range(60, 62)], "subtopics": [
            {"topic": "of vaporization", "pages": [range(325, 326)]}
        ]},
        {"topic": "Entropy", "pages": [range(100, 102)], "subtopics": [
            {"topic": "change of an ideal gas", "pages": [range(430, 433)]},
            {"topic": "Entropy balance", "pages": [range(120, 125)]},
            {"topic": "Entropy change", "pages": [range(105, 110)]},
            {"topic": "Entropy generation", "pages": [range(958, 962)]}
        ]},
        {"topic": "Fugacity", "subtopics": [
            {"topic": "in mixtures", "pages": [range(450, 452)]},
            {"topic": "pressure dependence", "pages": [range(455, 456)]}
        ]},
        {"topic": "Gibbs energy", "subtopics": [
            {"topic": "molar", "pages": [range(312, 313)]},
            {"topic": "partial molar", "pages": [range(426, 428)]}
        ]},
        {"topic": "Heat capacity", "pages": [range(70, 72)]},
        {"topic": "Ideal gas", "subtopics": [
            {"topic": "mixtures", "pages": [range(436, 438)]}
        ]},
        {"topic": "Internal energy", "pages": [range(40, 45)]},
        {"topic": "Joule-Thomson coefficient", "pages": [range(210, 212)]},
        {"topic": "Liquid(s)", "subtopics": [
            {"topic": "fugacity of", "pages": [range(316, 317)]}
        ]},
        {"topic": "Non-ideal gas", "pages": [range(600, 602)]},
        {"topic": "Peng-Robinson equation of state", "pages": [range(263, 265)], "subtopics": [
            {"topic": "fugacity coefficient from", "pages": [range(314, 317), range(440, 442)]}
        ]},
        {"topic": "Phase equilibrium", "pages": [range(300, 302)], "subtopics": [
            {"topic": "fugacity in", "pages": [range(424, 425)]}
        ]},
        {"topic": "Poynting correction", "pages": [range(318, 319)]},
        {"topic": "Rankine cycle", "pages": [range(170, 175)]},
        {"topic": "Solid(s)", "subtopics": [
            {"topic": "fugacity of", "pages": [320]}
        ]},
        {"topic": "van der Waals equation of state", "pages": [range(180, 184)]}
    ]);
    serde_json::to_string_pretty(&v).expect("index serializes") + "\n"
}

fn node(number: &str, title: &str, first: u32, last: u32, children: serde_json::Value) -> serde_json::Value {
    json!({"number": number, "title": title, "first_page": first, "last_page": last, "children": children})
}

/// The chapter and section tree.
pub fn nav_json() -> String {
    let none = json!([]);
    let v = json!({"chapters": [
        node("1", "Basic Concepts", 1, 29, none.clone()),
        node("2", "The First Law", 30, 69, none.clone()),
        node("3", "Properties of Pure Substances", 70, 99, none.clone()),
        node("4", "Entropy and the Second Law", 100, 160, json!([
            node("4.1", "Entropy: A New Concept", 100, 115, none.clone()),
            node("4.2", "The Second Law", 116, 135, none.clone()),
            node("4.3", "Entropy Balances", 136, 160, none.clone())
        ])),
        node("5", "Power and Refrigeration Cycles", 161, 220, none.clone()),
        node("6", "Property Relations", 221, 279, none.clone()),
        node("7", "Equilibrium of Pure Species", 280, 345, json!([
            node("7.1", "Criteria for Equilibrium", 280, 299, none.clone()),
            node("7.2", "Phase Diagrams", 300, 305, none.clone()),
            node("7.3", "Stability", 306, 313, none.clone()),
            node("7.4", "The Molar Gibbs Energy and Fugacity of a Pure Component", 314, 320, none.clone()),
            node("7.5", "Vapor Pressure Correlations", 321, 345, none.clone())
        ])),
        node("8", "Equations of State", 346, 409, none.clone()),
        node("9", "Mixtures", 410, 470, json!([
            node("9.1", "Partial Molar Properties", 410, 423, none.clone()),
            node("9.2", "The Partial Molar Gibbs Energy and Fugacity", 424, 440, none.clone()),
            node("9.3", "Ideal Solutions", 441, 470, none.clone())
        ])),
        node("10", "Activity Models", 471, 540, none.clone()),
        node("11", "Phase Equilibria of Mixtures", 541, 610, none.clone()),
        node("12", "Real Gases", 611, 680, none.clone()),
        node("13", "Reaction Equilibria", 681, 760, none.clone()),
        node("14", "Electrolytes", 761, 860, none.clone()),
        node("15", "Biochemical Systems", 861, 1000, json!([
            node("15.1", "Cells and Metabolism", 861, 949, none.clone()),
            node("15.7", "Thermodynamic Analysis of Bioreactors", 950, 1000, none.clone())
        ]))
    ]});
    serde_json::to_string_pretty(&v).expect("nav serializes") + "\n"
}

pub const CONFIG_FILE: &str = r#"# Example configuration; paths are relative to the working directory.
index_path = "fixtures/book/index.json"
nav_tree_path = "fixtures/book/nav.json"
transcript_dir = "fixtures/corpus"
analysis_dir = "analysis"
query_log = "queries.log.jsonl"
threshold = 10.0
context_k = 5

[gateway]
base_url = "http://localhost:11434"
model = "llama3.1:8b"
context_tokens = 16384
request_timeout = 300
retry_count = 1
lanes = 1
"#;

/// Every fixture file, keyed by path relative to the fixture root.
pub fn generate() -> BTreeMap<PathBuf, String> {
    let mut files = BTreeMap::new();
    let baseline = baseline_transcript();
    files.insert(
        PathBuf::from("baseline/009.json"),
        transcript_json(&baseline, &[("note", "recorded without loop suppression")]),
    );
    for n in 1..=CORPUS_LECTURES {
        let t = corpus_transcript(n);
        files.insert(
            PathBuf::from(format!("corpus/{}.json", t.lecture_id)),
            transcript_json(&t, &[]),
        );
        if COMPARISON_LECTURES.contains(&n) {
            files.insert(
                PathBuf::from(format!("second_asr/{}.txt", t.lecture_id)),
                second_asr_text(&t),
            );
        }
    }
    files.insert(PathBuf::from("terms.txt"), TERMS_FILE.to_string());
    files.insert(PathBuf::from("book/index.json"), index_json());
    files.insert(PathBuf::from("book/nav.json"), nav_json());
    files.insert(PathBuf::from("lectern.toml"), CONFIG_FILE.to_string());
    for (name, body) in replies::all() {
        files.insert(PathBuf::from(format!("replies/{name}")), body);
    }
    files
}

/// Writes [`generate`] under `root`.
pub fn write_all(root: &Path) -> io::Result<usize> {
    let files = generate();
    for (rel, body) in &files {
        let path = root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, body)?;
    }
    Ok(files.len())
}

/// The checked-in fixture directory of this workspace.
pub fn fixture_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
