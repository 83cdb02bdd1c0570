//! Acceptance checks, one line per criterion. Exits non-zero when any fails.
//!
//! Run with `cargo test -p lectern-cli --test acceptance`.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lectern::analysis::{
    dedup_confusion, detect_confusion, extract_questions, filter_questions, ConfusionRecord, Severity,
    DEFAULT_DEDUP_WINDOW_S, MAX_QUESTIONS, PASS_THROUGH_MAX,
};
use lectern::book_index::{parse_index, parse_nav_tree, BookIndex, NavTree, PageRange};
use lectern::llm::{DecodeNote, DEFAULT_PLACEHOLDERS};
use lectern::mock::{MockServer, Script, ScriptedModel};
use lectern::query::{answer_query, Library, QueryOptions};
use lectern::report::count_term;
use lectern::retrieval::{filter_and_order, merge_max, search_index, ScoredMatch, DEFAULT_THRESHOLD};
use lectern::terms::{Origin, PhraseLexicon, TermSet};
use lectern::transcript::{
    clean_transcript, corpus_stats, detect_loops, parse_transcript, read_transcript_dir, Transcript, TranscriptFormat,
    TranscriptSegment,
};
use lectern_fixtures::adversarial::{self as adv, run_kind};
use lectern_fixtures::{fixture_root, oracles, replies};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Wall-clock bound for cleaning the baseline transcript.
const BASELINE_TIME_LIMIT: Duration = Duration::from_secs(1);
/// Slack for comparing the blend oracle's floating-point result with 6.3.
const BLEND_TOLERANCE: f64 = 1e-9;
const FALLBACK_RUNS: usize = 1000;
const DEAD_URL_RUNS: usize = 5;
const PROPERTY_CASES: usize = 1000;
const FILTER_SCENARIOS: usize = 50;
const FUZZ_RESPONSES: u64 = 100;
const SEED: u64 = 0xACCE_0717;

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root")
}

fn library() -> Library {
    let f = fixture_root();
    Library {
        index: parse_index(&f.join("book/index.json")).expect("fixture index"),
        nav: parse_nav_tree(&f.join("book/nav.json")).expect("fixture nav"),
        lexicon: PhraseLexicon::builtin(),
    }
}

fn scripted(replies: Vec<String>) -> ScriptedModel {
    ScriptedModel::new(Script::new().on_seq("", replies))
}

fn c1_loop_baseline() -> Outcome {
    let t = parse_transcript(
        &fixture_root().join("baseline/009.json"),
        TranscriptFormat::SegmentedJson,
    )
    .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let loops = detect_loops(&t);
    let (clean, report) = clean_transcript(&t);
    let elapsed = start.elapsed();

    ensure!(t.segments.len() == 826, "{} segments", t.segments.len());
    let mut found: Vec<(String, usize)> = loops.iter().map(|l| (l.text.clone(), l.count)).collect();
    found.sort();
    let mut expected = vec![
        ("Elizabeth.".to_string(), 37),
        ("That's a lot.".to_string(), 10),
        ("You told me to.".to_string(), 3),
        ("Okay.".to_string(), 3),
    ];
    expected.sort();
    ensure!(found == expected, "loops {found:?}");
    ensure!(
        report.removed_segment_count == 49,
        "removed {}",
        report.removed_segment_count
    );

    let mut dropped = BTreeSet::new();
    for l in &loops {
        dropped.extend(l.first_index + 1..l.first_index + l.count);
    }
    let kept: Vec<&TranscriptSegment> = t
        .segments
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .map(|(_, s)| s)
        .collect();
    ensure!(
        clean.segments.iter().collect::<Vec<_>>() == kept,
        "cleaned order differs"
    );
    ensure!(elapsed < BASELINE_TIME_LIMIT, "took {elapsed:?}");
    Ok(format!(
        "4 loops (37, 10, 3, 3), 49 removed, 777 kept, {:.1} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

fn c2_corpus_stats() -> Outcome {
    let loaded = read_transcript_dir(&fixture_root().join("corpus")).map_err(|e| e.to_string())?;
    let transcripts: Vec<Transcript> = loaded.into_iter().map(|(t, _)| t).collect();
    let reports: Vec<_> = transcripts.iter().map(|t| clean_transcript(t).1).collect();
    let s = corpus_stats(&transcripts, &reports).map_err(|e| e.to_string())?;
    ensure!(s.lectures == 39, "{} lectures", s.lectures);
    ensure!(s.raw_segments == 20_361, "{} raw", s.raw_segments);
    ensure!(s.loops == 1, "{} loops", s.loops);
    ensure!(s.removed_segments == 4, "{} removed", s.removed_segments);
    ensure!(s.clean_segments == 20_357, "{} clean", s.clean_segments);
    let l30 = reports.iter().find(|r| r.lecture_id == "030").ok_or("no lecture 030")?;
    ensure!(
        l30.loops.len() == 1 && l30.loops[0].text == "What?" && l30.loops[0].count == 5,
        "lecture 030 loops {:?}",
        l30.loops
    );
    Ok("20,361 raw, one \"What?\"x5 loop in 030, 4 removed, 20,357 clean".into())
}

/// The weighted blend that the production path must not use.
fn blend_oracle(llm: Option<f64>, pattern: Option<f64>) -> f64 {
    0.7 * llm.unwrap_or(0.0) + 0.3 * pattern.unwrap_or(0.0)
}

fn c3_max_merge() -> Outcome {
    let pattern = ScoredMatch {
        topic_path: vec![
            "Peng-Robinson equation of state".into(),
            "fugacity coefficient from".into(),
        ],
        pages: vec![PageRange::new(314, 317).ok_or("bad range")?],
        score: 21.0,
        origin: Origin::Pattern,
        matched_terms: vec!["fugacity coefficient".into()],
    };
    let merged = merge_max(&[pattern], &[]);
    ensure!(merged.len() == 1 && merged[0].score == 21.0, "merged {merged:?}");
    let kept = filter_and_order(merged, DEFAULT_THRESHOLD);
    ensure!(
        kept.len() == 1,
        "max merge dropped the match at threshold {DEFAULT_THRESHOLD}"
    );
    let blended = blend_oracle(None, Some(21.0));
    ensure!((blended - 6.3).abs() < BLEND_TOLERANCE, "blend gave {blended}");
    ensure!(blended < DEFAULT_THRESHOLD, "blend would also pass");
    Ok(format!(
        "max 21 passes threshold {DEFAULT_THRESHOLD}; blend oracle {blended:.1} fails"
    ))
}

fn c4_fugacity_trace() -> Outcome {
    let server = MockServer::start(replies::fugacity_script());
    let gw = lectern::llm::HttpGateway::new(lectern::llm::GatewayConfig {
        base_url: server.url().to_string(),
        ..Default::default()
    });
    let out = answer_query("Explain fugacity.", &library(), Some(&gw), &QueryOptions::default());
    ensure!(
        out.llm_terms.as_ref().is_some_and(|t| t.expanded),
        "model terms were not used"
    );
    let got: Vec<(String, u32, String)> = out
        .context
        .entries
        .iter()
        .map(|e| {
            let loc = e.location.as_ref().map_or("none".to_string(), |l| {
                format!("{}/{}", l.chapter_number, l.section_number.as_deref().unwrap_or("-"))
            });
            (e.path_label(), e.pages[0].first, loc)
        })
        .collect();
    let expected = [
        (
            "Peng-Robinson equation of state > fugacity coefficient from",
            314,
            "7/7.4",
        ),
        ("Corresponding states > fugacity coefficient", 315, "7/7.4"),
        ("Liquid(s) > fugacity of", 316, "7/7.4"),
        ("Solid(s) > fugacity of", 320, "7/7.4"),
        ("Phase equilibrium > fugacity in", 424, "9/9.2"),
    ];
    let expected: Vec<(String, u32, String)> = expected
        .iter()
        .map(|(p, f, l)| (p.to_string(), *f, l.to_string()))
        .collect();
    ensure!(got == expected, "context {got:?}");
    Ok("314 -> 315 -> 316 -> 320 -> 424, sections 7.4 x4 and 9.2".into())
}

fn c5_locate_page() -> Outcome {
    let nav = parse_nav_tree(&fixture_root().join("book/nav.json")).map_err(|e| e.to_string())?;
    let ctx = nav.locate_page(102).ok_or("page 102 not found")?;
    ensure!(ctx.chapter_number == "4", "chapter {}", ctx.chapter_number);
    ensure!(
        ctx.section_number.as_deref() == Some("4.1"),
        "section {:?}",
        ctx.section_number
    );
    ensure!(
        ctx.section_title.as_deref() == Some("Entropy: A New Concept"),
        "title {:?}",
        ctx.section_title
    );
    Ok(format!("page 102 -> {ctx}"))
}

fn c6_placeholders() -> Outcome {
    let m = scripted(vec![adv::all_placeholder_confusion()]);
    let err = match detect_confusion(&adv::transcript(), &m, DEFAULT_DEDUP_WINDOW_S) {
        Ok(out) => return Err(format!("accepted {} records", out.records.len())),
        Err(e) => e,
    };
    let is_placeholder = match &err {
        lectern::analysis::AnalysisError::Model { source, .. } => source.is_placeholder(),
        _ => false,
    };
    ensure!(is_placeholder, "wrong error: {err}");
    ensure!(m.call_count() == 2, "{} calls", m.call_count());

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut accepted, mut rejected) = (0, 0);
    for case in 0..FUZZ_RESPONSES {
        let kind = case as usize % adv::KINDS.len();
        let m = scripted(vec![
            adv::placeholder_reply(&mut rng, kind),
            adv::placeholder_reply(&mut rng, kind),
        ]);
        match run_kind(kind, &m) {
            Ok(records) => {
                accepted += 1;
                let text = records.to_string();
                if let Some(p) = DEFAULT_PLACEHOLDERS.iter().find(|p| text.contains(*p)) {
                    return Err(format!("case {case}: {p} in {text}"));
                }
            }
            Err(_) => rejected += 1,
        }
        ensure!(m.call_count() <= 2, "case {case}: {} calls", m.call_count());
    }
    Ok(format!(
        "re-prompted once then rejected; {FUZZ_RESPONSES} fuzzed replies: {accepted} clean, {rejected} rejected, none leaked"
    ))
}

fn c7_question_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for scenario in 0..FILTER_SCENARIOS {
        let n = rng.gen_range(0..=60);
        let cands = adv::candidates(n);
        let picks = rng.gen_range(0..=25);
        let ids: Vec<usize> = (0..picks).map(|_| rng.gen_range(0..=n + 3)).collect();
        let m = scripted(vec![adv::filter_reply(&ids)]);
        let out = filter_questions("L", &cands, &m).map_err(|e| format!("scenario {scenario}: {e}"))?;
        let len = out.records.len();
        ensure!(len <= n.min(MAX_QUESTIONS), "scenario {scenario}: {len} from {n}");
        if n <= PASS_THROUGH_MAX {
            ensure!(len == n, "scenario {scenario}: {len} of {n} passed through");
        }
    }

    let m = scripted(vec![adv::filter_reply(&adv::KEEP_11_OF_46)]);
    let out = filter_questions("L", &adv::candidates(46), &m).map_err(|e| e.to_string())?;
    let texts: Vec<String> = out.records.iter().map(|r| r.text.clone()).collect();
    let expected: Vec<String> = adv::KEEP_11_OF_46
        .iter()
        .map(|id| format!("Candidate question {}?", id - 1))
        .collect();
    ensure!(texts == expected, "46 -> {}", texts.len());

    let t = parse_transcript(&fixture_root().join("corpus/009.json"), TranscriptFormat::SegmentedJson)
        .map_err(|e| e.to_string())?;
    let m = ScriptedModel::new(replies::lecture9_script());
    extract_questions(&t, &m).map_err(|e| e.to_string())?;
    let reqs = m.requests();
    let filter = reqs
        .iter()
        .find(|r| r.system.contains(replies::route::FILTER))
        .ok_or("no pass-2 request")?;
    let candidate_lines: Vec<&str> = replies::LECTURE9_LINES.iter().map(|(_, l)| *l).collect();
    for seg in &t.segments {
        if !candidate_lines.contains(&seg.text.as_str()) {
            ensure!(!filter.prompt.contains(&seg.text), "pass 2 saw {:?}", seg.text);
        }
    }
    Ok(format!(
        "{FILTER_SCENARIOS} scenarios within bounds, 46 -> 11 replayed, pass-2 prompt {} chars vs transcript {}",
        filter.prompt.len(),
        t.full_text().len()
    ))
}

fn c8_dedup() -> Outcome {
    let records: Vec<ConfusionRecord> = (0..28)
        .map(|i| ConfusionRecord {
            timestamp: 600.0 + f64::from(i) * 4.0,
            topic: "Linear interpolation".into(),
            evidence: format!("asked again ({i})"),
            severity: if i == 20 {
                Severity::Significant
            } else {
                Severity::Minor
            },
        })
        .collect();
    ensure!(
        records.last().unwrap().timestamp - records[0].timestamp <= 120.0,
        "records span over 2 min"
    );
    let once = dedup_confusion(records, DEFAULT_DEDUP_WINDOW_S);
    ensure!(once.len() == 1, "{} records left", once.len());
    ensure!(
        once[0].severity == Severity::Significant,
        "severity {:?}",
        once[0].severity
    );
    ensure!(once[0].timestamp == 600.0, "kept timestamp {}", once[0].timestamp);
    let twice = dedup_confusion(once.clone(), DEFAULT_DEDUP_WINDOW_S);
    ensure!(twice == once, "not idempotent");
    Ok("28 -> 1, upgraded to significant, idempotent".into())
}

fn c9_schema_drift() -> Outcome {
    let t = adv::transcript();
    let out = detect_confusion(&t, &scripted(vec![adv::drifted_confusion()]), DEFAULT_DEDUP_WINDOW_S)
        .map_err(|e| e.to_string())?;
    ensure!(out.records.len() == 2, "{} confusion records", out.records.len());
    ensure!(
        out.records[0].topic == "Heat flow direction",
        "topic {:?}",
        out.records[0].topic
    );
    ensure!(
        out.notes.iter().any(|n| matches!(n, DecodeNote::FieldAliasUsed { .. })),
        "no alias note"
    );
    let out = lectern::analysis::catalog_anecdotes(&t, &scripted(vec![adv::drifted_anecdotes()]))
        .map_err(|e| e.to_string())?;
    ensure!(
        out.records.len() == 1 && out.records[0].description == "a room",
        "anecdotes {:?}",
        out.records
    );
    ensure!(!out.notes.is_empty(), "no anecdote notes");

    let replies = adv::malformed_replies();
    let cands = adv::candidates(8);
    let mut runs = 0;
    for raw in &replies {
        for kind in 0..=adv::KINDS.len() {
            let m = scripted(vec![raw.clone()]);
            let r = catch_unwind(AssertUnwindSafe(|| {
                if kind == adv::KINDS.len() {
                    filter_questions("L", &cands, &m).map(|_| ())
                } else {
                    run_kind(kind, &m).map(|_| ())
                }
            }));
            ensure!(r.is_ok(), "panic on {raw:?}");
            runs += 1;
        }
    }
    Ok(format!(
        "aliases and bare strings decode with notes; {runs} adversarial runs, no crash"
    ))
}

fn lectern_cmd(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lectern"));
    cmd.current_dir(root())
        .env_remove("LECTERN_LLM_URL")
        .env_remove("LECTERN_LLM_MODEL")
        .args(["--config", "fixtures/lectern.toml"])
        .args(args);
    cmd
}

fn c10_fallback() -> Outcome {
    let template = answer_query("Explain fugacity.", &library(), None, &QueryOptions::default())
        .answer
        .render()
        + "\n";
    let args = ["query", "--no-llm", "--no-log", "--ask", "Explain fugacity."];
    let first = lectern_cmd(&args).output().map_err(|e| e.to_string())?;
    ensure!(first.status.success(), "exit {:?}", first.status.code());
    ensure!(
        first.stdout == template.as_bytes(),
        "stdout {:?}",
        String::from_utf8_lossy(&first.stdout)
    );
    for run in 1..FALLBACK_RUNS {
        let o = lectern_cmd(&args).output().map_err(|e| e.to_string())?;
        ensure!(o.stdout == first.stdout && o.status.success(), "run {run} differed");
    }
    let dead = [
        "--llm-url",
        "http://127.0.0.1:9",
        "query",
        "--no-log",
        "--ask",
        "Explain fugacity.",
    ];
    for run in 0..DEAD_URL_RUNS {
        let o = lectern_cmd(&dead).output().map_err(|e| e.to_string())?;
        ensure!(
            o.stdout == first.stdout && o.status.success(),
            "unreachable-server run {run} differed"
        );
    }
    Ok(format!(
        "{FALLBACK_RUNS} runs byte-identical, {DEAD_URL_RUNS} unreachable-server runs match"
    ))
}

const LOOP_TEXTS: [&str; 6] = ["Okay.", " Okay.", "okay.", "What?", "So.", "Elizabeth."];
const WORDS: [&str; 12] = [
    "gas",
    "ideal",
    "entropy",
    "Fugacity",
    "of",
    "state",
    "Peng-Robinson",
    "equation",
    "coefficient",
    "mixtures",
    "heat",
    "what's",
];

fn phrase(rng: &mut ChaCha8Rng, max: usize) -> String {
    let n = rng.gen_range(1..=max);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_pages(rng: &mut ChaCha8Rng) -> serde_json::Value {
    let n = rng.gen_range(0..3);
    (0..n)
        .map(|_| {
            let a = rng.gen_range(1..600);
            json!([a, a + rng.gen_range(0..8)])
        })
        .collect()
}

fn random_index(rng: &mut ChaCha8Rng) -> BookIndex {
    let nodes: Vec<serde_json::Value> = (0..rng.gen_range(0..13))
        .map(|_| {
            let subs: Vec<serde_json::Value> = (0..rng.gen_range(0..4))
                .map(|_| json!({"topic": phrase(rng, 4), "pages": random_pages(rng)}))
                .collect();
            json!({"topic": phrase(rng, 3), "pages": random_pages(rng), "subtopics": subs})
        })
        .collect();
    BookIndex::from_json(&serde_json::to_string(&nodes).unwrap()).expect("generated index parses")
}

fn c11_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for case in 0..PROPERTY_CASES {
        let n = rng.gen_range(0..60);
        let texts: Vec<&str> = (0..n).map(|_| *LOOP_TEXTS.choose(&mut rng).unwrap()).collect();
        let segs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| TranscriptSegment::new(i as f64, i as f64 + 1.0, *t))
            .collect();
        let t = Transcript::new("L", segs).map_err(|e| e.to_string())?;
        let got: Vec<(usize, usize)> = detect_loops(&t).iter().map(|l| (l.first_index, l.count)).collect();
        ensure!(got == oracles::loops(&texts), "loop case {case}: {texts:?}");
    }

    let nav = parse_nav_tree(&fixture_root().join("book/nav.json")).map_err(|e| e.to_string())?;
    let mut searched = 0;
    while searched < PROPERTY_CASES {
        let index = random_index(&mut rng);
        if index.len() > 50 {
            continue;
        }
        let terms: Vec<String> = (0..rng.gen_range(1..5)).map(|_| phrase(&mut rng, 2)).collect();
        let llm = rng.gen_bool(0.5);
        let nav = if rng.gen_bool(0.5) {
            nav.clone()
        } else {
            NavTree::default()
        };
        let origin = if llm { Origin::Llm } else { Origin::Pattern };
        let hits = search_index(&TermSet::new(origin, &terms), &index, &nav);
        let entries: Vec<oracles::OracleEntry> = index
            .iter()
            .map(|e| oracles::OracleEntry {
                path: e.topic_path(),
                first_page: e.first_page(),
            })
            .collect();
        let max_page = nav.max_page().or_else(|| index.max_page()).unwrap_or(1);
        let expected: Vec<(Vec<String>, f64)> = oracles::search_scores(&terms, &entries, llm, max_page)
            .into_iter()
            .map(|(i, s)| (entries[i].path.clone(), f64::from(s)))
            .collect();
        let got: Vec<(Vec<String>, f64)> = hits.iter().map(|h| (h.topic_path.clone(), h.score)).collect();
        ensure!(got == expected, "search case {searched}: terms {terms:?}");
        searched += 1;
    }

    const ALPHABET: [char; 8] = ['a', 'A', 'b', 's', '\'', ' ', '.', '-'];
    const TERMS: [&str; 8] = ["a", "ab", "a b", "b(s)", "a-b", "ab(s)", "s", "a's"];
    for case in 0..PROPERTY_CASES {
        let len = rng.gen_range(0..=40);
        let text: String = (0..len).map(|_| *ALPHABET.choose(&mut rng).unwrap()).collect();
        let term = *TERMS.choose(&mut rng).unwrap();
        ensure!(
            count_term(&text, term) == oracles::count_term(&text, term),
            "count case {case}: {text:?} / {term:?}"
        );
    }
    Ok(format!(
        "{PROPERTY_CASES} cases each: loops, search scores, term counts"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "loop-cleaner baseline", c1_loop_baseline),
        (2, "corpus statistics", c2_corpus_stats),
        (3, "max-merge regression", c3_max_merge),
        (4, "fugacity pipeline trace", c4_fugacity_trace),
        (5, "page-context lookup", c5_locate_page),
        (6, "placeholder defense", c6_placeholders),
        (7, "two-pass question bounds", c7_question_bounds),
        (8, "confusion dedup", c8_dedup),
        (9, "schema-drift tolerance", c9_schema_drift),
        (10, "fallback determinism", c10_fallback),
        (11, "property suites", c11_properties),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let outcome = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
