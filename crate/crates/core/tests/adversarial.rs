//! Model output that is malformed, drifted or copied from the prompt's
//! examples.

use std::panic::{catch_unwind, AssertUnwindSafe};

use lectern::analysis::{
    catalog_anecdotes, dedup_confusion, detect_confusion, filter_questions, summarize, AnalysisError, ConfusionRecord,
    Severity, DEFAULT_DEDUP_WINDOW_S,
};
use lectern::llm::{DecodeNote, DEFAULT_PLACEHOLDERS};
use lectern::mock::{Script, ScriptedModel};
use lectern_fixtures::adversarial::{self as adv, run_kind, transcript};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn model(replies: Vec<String>) -> ScriptedModel {
    ScriptedModel::new(Script::new().on_seq("", replies))
}

#[test]
fn placeholder_timestamps_get_one_reprompt_then_fail() {
    let m = model(vec![adv::all_placeholder_confusion()]);
    let err = detect_confusion(&transcript(), &m, DEFAULT_DEDUP_WINDOW_S).unwrap_err();
    match &err {
        AnalysisError::Model { source, .. } => assert!(source.is_placeholder()),
        other => panic!("unexpected {other:?}"),
    }
    let reqs = m.requests();
    assert_eq!(reqs.len(), 2);
    assert!(reqs[1].prompt.contains("H:MM:SS"));
    assert!(reqs[1].prompt.starts_with(&reqs[0].prompt));
}

#[test]
fn a_clean_second_answer_is_accepted() {
    let bad = json!({"confusion_points": [{"timestamp": "MM:SS", "topic": "entropy"}]}).to_string();
    let good =
        json!({"confusion_points": [{"timestamp": "0:03:00", "topic": "entropy", "severity": "minor"}]}).to_string();
    let m = model(vec![bad, good]);
    let out = detect_confusion(&transcript(), &m, DEFAULT_DEDUP_WINDOW_S).unwrap();
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.calls, 2);
    assert!(out
        .notes
        .iter()
        .any(|n| matches!(n, DecodeNote::PlaceholderHit { literal } if literal == "MM:SS")));
}

#[test]
fn no_placeholder_ever_reaches_a_record() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut accepted, mut rejected) = (0, 0);
    for case in 0..100 {
        let kind = case % adv::KINDS.len();
        let replies = vec![
            adv::placeholder_reply(&mut rng, kind),
            adv::placeholder_reply(&mut rng, kind),
        ];
        let m = model(replies);
        match run_kind(kind, &m) {
            Ok(records) => {
                accepted += 1;
                let text = records.to_string();
                for p in DEFAULT_PLACEHOLDERS {
                    assert!(!text.contains(p), "case {case}: {p} leaked into {text}");
                }
            }
            Err(e) => {
                rejected += 1;
                assert!(!e.is_unavailable(), "case {case}: {e}");
            }
        }
        assert!(m.call_count() <= 2);
    }
    assert!(
        accepted > 10 && rejected > 10,
        "accepted {accepted}, rejected {rejected}"
    );
}

#[test]
fn drifted_field_names_and_bare_strings_decode() {
    let t = transcript();
    let out = detect_confusion(&t, &model(vec![adv::drifted_confusion()]), DEFAULT_DEDUP_WINDOW_S).unwrap();
    assert_eq!(out.records.len(), 2);
    assert_eq!(out.records[0].topic, "Heat flow direction");
    assert_eq!(out.records[0].evidence, "asked why");
    assert_eq!(out.records[1].severity, Severity::Significant);
    assert!(out.notes.iter().any(|n| matches!(n, DecodeNote::FieldAliasUsed { .. })));
    assert!(out.notes.iter().any(|n| matches!(n, DecodeNote::Dropped { .. })));

    let out = catalog_anecdotes(&t, &model(vec![adv::drifted_anecdotes()])).unwrap();
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.records[0].description, "a room");
    assert!(!out.notes.is_empty());

    let out = summarize(&t, &model(vec![adv::drifted_summary()])).unwrap();
    assert_eq!(out.records[0].topics[0].name, "entropy");
    assert_eq!(out.records[0].topics[0].description, "first look");
    assert!(!out.notes.is_empty());
}

#[test]
fn malformed_replies_decode_or_error_cleanly() {
    let candidates = adv::candidates(8);
    for raw in adv::malformed_replies() {
        for kind in 0..=adv::KINDS.len() {
            let m = model(vec![raw.clone()]);
            let result = catch_unwind(AssertUnwindSafe(|| {
                if kind == adv::KINDS.len() {
                    filter_questions("L", &candidates, &m).map(|o| o.records.len())
                } else {
                    run_kind(kind, &m).map(|v| v.as_array().map_or(1, Vec::len))
                }
            }));
            assert!(result.is_ok(), "panic on {raw:?} (kind {kind})");
        }
    }
}

#[test]
fn forty_six_candidates_filter_to_eleven() {
    let m = model(vec![adv::filter_reply(&adv::KEEP_11_OF_46)]);
    let out = filter_questions("L", &adv::candidates(46), &m).unwrap();
    let texts: Vec<String> = out.records.iter().map(|r| r.text.clone()).collect();
    let expected: Vec<String> = adv::KEEP_11_OF_46
        .iter()
        .map(|id| format!("Candidate question {}?", id - 1))
        .collect();
    assert_eq!(texts, expected);
    assert_eq!(m.call_count(), 1);
}

#[test]
fn twenty_eight_repeats_collapse_to_one() {
    let records: Vec<ConfusionRecord> = (0..28)
        .map(|i| ConfusionRecord {
            timestamp: 600.0 + f64::from(i) * 4.0,
            topic: if i % 2 == 0 {
                "Interpolation".into()
            } else {
                "interpolation".into()
            },
            evidence: format!("repeat {i}"),
            severity: match i {
                17 => Severity::Significant,
                _ if i % 2 == 0 => Severity::Minor,
                _ => Severity::Moderate,
            },
        })
        .collect();
    let once = dedup_confusion(records, DEFAULT_DEDUP_WINDOW_S);
    assert_eq!(once.len(), 1);
    assert_eq!(once[0].timestamp, 600.0);
    assert_eq!(once[0].severity, Severity::Significant);
    assert_eq!(dedup_confusion(once.clone(), DEFAULT_DEDUP_WINDOW_S), once);
}
