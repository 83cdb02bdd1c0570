//! End-to-end runs over the sample data in `fixtures/`.

use lectern::analysis::{
    analyze_corpus, catalog_anecdotes, detect_confusion, extract_questions, summarize, AnalysisKind, AnalysisOptions,
    AnecdoteCategory, ItemStatus, LectureType, Severity, Speaker, DEFAULT_DEDUP_WINDOW_S, RUN_REPORT_FILE,
};
use lectern::book_index::{parse_index, parse_nav_tree};
use lectern::llm::{DecodeNote, GatewayConfig, HttpGateway, ANALYSIS_TEMPERATURE, SYNTHESIS_TEMPERATURE};
use lectern::mock::{MockReply, MockServer, ScriptedModel};
use lectern::query::{answer_query, Library, QueryOptions};
use lectern::synthesis::AnswerMode;
use lectern::terms::PhraseLexicon;
use lectern::transcript::{read_transcript_dir, Transcript};
use lectern_fixtures::{fixture_root, replies};

fn library() -> Library {
    let root = fixture_root();
    Library {
        index: parse_index(&root.join("book/index.json")).unwrap(),
        nav: parse_nav_tree(&root.join("book/nav.json")).unwrap(),
        lexicon: PhraseLexicon::builtin(),
    }
}

fn gateway(url: &str) -> HttpGateway {
    HttpGateway::new(GatewayConfig {
        base_url: url.to_string(),
        ..GatewayConfig::default()
    })
}

fn lecture(n: u32) -> Transcript {
    let path = fixture_root().join(format!("corpus/{n:03}.json"));
    lectern::transcript::parse_transcript(&path, lectern::transcript::TranscriptFormat::SegmentedJson).unwrap()
}

const FUGACITY_PAGES: [u32; 5] = [314, 315, 316, 320, 424];

#[test]
fn fugacity_query_over_http() {
    let server = MockServer::start(replies::fugacity_script());
    let gw = gateway(server.url());
    let out = answer_query("Explain fugacity.", &library(), Some(&gw), &QueryOptions::default());

    let firsts: Vec<u32> = out.context.entries.iter().map(|e| e.pages[0].first).collect();
    assert_eq!(firsts, FUGACITY_PAGES);
    let locations: Vec<(String, Option<String>)> = out
        .context
        .entries
        .iter()
        .map(|e| {
            let l = e.location.clone().unwrap();
            (l.chapter_number, l.section_number)
        })
        .collect();
    let expect = |c: &str, s: &str| (c.to_string(), Some(s.to_string()));
    assert_eq!(
        locations,
        [
            expect("7", "7.4"),
            expect("7", "7.4"),
            expect("7", "7.4"),
            expect("7", "7.4"),
            expect("9", "9.2")
        ]
    );
    assert!(out.llm_terms.as_ref().unwrap().expanded);
    assert_eq!(out.mode(), AnswerMode::Llm);
    assert!(out.answer.unverified_citations.is_empty());
    assert_eq!(out.answer.references.len(), 5);
    let rendered = out.answer.render();
    assert!(rendered.contains("Chapter 7, Section 7.4"));
    assert!(rendered.contains("Chapter 9, Section 9.2"));
    assert!(rendered.contains("\n\nReferences:\n- Peng-Robinson equation of state > fugacity coefficient from: pages"));

    let reqs = server.requests();
    assert_eq!(reqs.len(), 2);
    let extraction = reqs
        .iter()
        .find(|r| r.system().contains(replies::route::EXTRACTION))
        .unwrap();
    let synthesis = reqs
        .iter()
        .find(|r| r.system().contains(replies::route::SYNTHESIS))
        .unwrap();
    assert_eq!(extraction.temperature(), Some(0.2));
    assert_eq!(synthesis.temperature(), Some(SYNTHESIS_TEMPERATURE));
    assert!(synthesis.prompt().contains(&out.context.rendered_text));
}

#[test]
fn fugacity_without_a_model_is_the_template() {
    let out = answer_query("Explain fugacity.", &library(), None, &QueryOptions::default());
    assert_eq!(
        out.answer.render(),
        "Check out \"Peng-Robinson equation of state > fugacity coefficient from\" on pages 314--317, 440--442."
    );
    let firsts: Vec<u32> = out.context.entries.iter().map(|e| e.pages[0].first).collect();
    assert_eq!(firsts, FUGACITY_PAGES);
    assert!(out.context.entries.iter().all(|e| e.location.is_some()));
}

#[test]
fn unreachable_model_degrades_to_the_template() {
    let down = ScriptedModel::unavailable();
    let with = answer_query("Explain fugacity.", &library(), Some(&down), &QueryOptions::default());
    let without = answer_query("Explain fugacity.", &library(), None, &QueryOptions::default());
    assert_eq!(with.answer, without.answer);
    assert!(with.llm_error.is_some());
}

#[test]
fn server_errors_degrade_to_the_template() {
    let server = MockServer::with_handler(|_| MockReply::status(503));
    let gw = HttpGateway::new(GatewayConfig {
        base_url: server.url().to_string(),
        retry_count: 0,
        ..GatewayConfig::default()
    });
    let out = answer_query("Explain fugacity.", &library(), Some(&gw), &QueryOptions::default());
    assert_eq!(out.mode(), AnswerMode::Fallback);
    assert_eq!(out.context.entries.len(), 5);
}

#[test]
fn unknown_query_says_so() {
    let out = answer_query("Tell me about zymurgy.", &library(), None, &QueryOptions::default());
    assert_eq!(out.answer.body, lectern::synthesis::NO_MATCH_ANSWER);
}

#[test]
fn lecture9_analyses() {
    let t = lecture(9);
    let model = ScriptedModel::new(replies::lecture9_script());

    let summary = summarize(&t, &model).unwrap();
    assert_eq!(
        summary.records[0].title,
        "Entropy and the Direction of Natural Processes"
    );
    assert_eq!(summary.records[0].lecture_type, LectureType::NewMaterial);
    assert_eq!(summary.records[0].topics.len(), 4);

    let questions = extract_questions(&t, &model).unwrap();
    assert_eq!(questions.records.len(), 11);
    assert_eq!(questions.calls, 2);
    let students = questions
        .records
        .iter()
        .filter(|q| q.speaker == Speaker::Student)
        .count();
    assert_eq!((students, questions.records.len() - students), (6, 5));
    assert!(questions.records.iter().all(|q| !q.text.contains("midterm")));

    let confusion = detect_confusion(&t, &model, DEFAULT_DEDUP_WINDOW_S).unwrap();
    assert_eq!(confusion.records.len(), 6);
    let first_moderate = &confusion.records[1];
    assert_eq!(first_moderate.timestamp, 942.0);
    assert_eq!(first_moderate.severity, Severity::Moderate);
    assert_eq!(confusion.records.last().unwrap().severity, Severity::Significant);

    let anecdotes = catalog_anecdotes(&t, &model).unwrap();
    assert_eq!(anecdotes.records.len(), 7);
    assert_eq!(anecdotes.records[6].category, AnecdoteCategory::Story);
    assert!(anecdotes
        .notes
        .iter()
        .any(|n| matches!(n, DecodeNote::Repaired { detail } if detail.contains("metaphor"))));

    for r in model.requests() {
        assert_eq!(r.temperature, Some(ANALYSIS_TEMPERATURE));
        assert!(r.json_mode);
    }
}

#[test]
fn question_filter_never_sees_the_transcript() {
    let t = lecture(9);
    let model = ScriptedModel::new(replies::lecture9_script());
    extract_questions(&t, &model).unwrap();
    let reqs = model.requests();
    let filter = reqs.iter().find(|r| r.system.contains(replies::route::FILTER)).unwrap();
    let candidate_lines: Vec<&str> = replies::LECTURE9_LINES.iter().map(|(_, l)| *l).collect();
    for seg in &t.segments {
        if !candidate_lines.contains(&seg.text.as_str()) {
            assert!(!filter.prompt.contains(&seg.text), "pass 2 saw {:?}", seg.text);
        }
    }
    assert!(filter.prompt.len() * 20 < t.full_text().len());
}

#[test]
fn whole_corpus_over_http() {
    let server = MockServer::with_handler(|r| match replies::corpus_reply(r.system(), r.prompt()) {
        Some(text) => MockReply::generate(&text),
        None => MockReply::status(500),
    });
    let gw = HttpGateway::new(GatewayConfig {
        base_url: server.url().to_string(),
        lanes: 4,
        ..GatewayConfig::default()
    });
    let transcripts: Vec<Transcript> = read_transcript_dir(&fixture_root().join("corpus"))
        .unwrap()
        .into_iter()
        .map(|(t, _)| t)
        .collect();
    let out = tempfile::tempdir().unwrap();
    let opts = AnalysisOptions {
        out_dir: Some(out.path().to_path_buf()),
        model_name: "mock".into(),
        lanes: 4,
        ..AnalysisOptions::default()
    };
    let report = analyze_corpus(&transcripts, &gw, &opts);
    assert_eq!(report.lectures, 39);
    for kind in AnalysisKind::ALL {
        let t = report.tally[&kind];
        assert_eq!((t.ok, t.failed, t.skipped), (37, 0, 2), "{kind}");
    }
    assert!(!report.bimodal_suspect);
    assert_eq!(report.question_counts["009"], 11);
    let files = std::fs::read_dir(out.path()).unwrap().count();
    assert_eq!(files, 37 * 4 + 1);
    assert!(out.path().join(RUN_REPORT_FILE).exists());
    assert!(report
        .items
        .iter()
        .filter(|i| i.status == ItemStatus::Skipped)
        .all(|i| i.lecture_id == "003" || i.lecture_id == "023"));
}
