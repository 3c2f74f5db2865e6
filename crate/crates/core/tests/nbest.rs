mod common;

use std::time::Duration;

use proptest::prelude::*;
use sentimt_core::nbest::{
    parse_jsonl_nbest, parse_moses_nbest, write_jsonl_nbest, MtBackend, TranslateRequest, DEFAULT_BEAM_SIZE,
    DEFAULT_NUM_CANDIDATES,
};
use sentimt_core::{Error, NBestList, NBestMap, SourceSegment};

use common::MockServer;

const MOSES: &str = "\
0 ||| el gato está en la alfombra ||| LM0= -12.1 TM0= -3.2 ||| -4.50
0 ||| el gato esta en la alfombra ||| LM0= -13.0 TM0= -3.9 ||| -5.25
1 ||| hola mundo ||| LM0= -2.0 ||| -1.0
";

#[test]
fn moses_three_line_fixture() {
    let parsed = parse_moses_nbest(MOSES.as_bytes(), 10).unwrap();
    assert!(parsed.warnings.is_empty());
    assert_eq!(parsed.lists.len(), 2);
    let first = &parsed.lists[&0];
    assert_eq!(first.len(), 2);
    let c = &first.candidates()[1];
    assert_eq!(c.rank, 1);
    assert_eq!(c.text, "el gato esta en la alfombra");
    assert_eq!(c.model_score, Some(-5.25));
    assert_eq!(c.features.as_deref(), Some("LM0= -13.0 TM0= -3.9"));
    assert_eq!(parsed.lists[&1].best().text, "hola mundo");
}

#[test]
fn moses_rising_score_is_a_warning() {
    let raw = "3 ||| a ||| f ||| -2.0\n3 ||| b ||| f ||| -1.0\n";
    let parsed = parse_moses_nbest(raw.as_bytes(), 10).unwrap();
    assert_eq!(parsed.lists[&3].len(), 2);
    assert_eq!(parsed.warnings.len(), 1);
}

#[test]
fn moses_errors_carry_line_numbers() {
    let raw = format!("{MOSES}2 ||| roto ||| f\n");
    match parse_moses_nbest(raw.as_bytes(), 10) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("unexpected {other:?}"),
    }
    let long: String = (0..3).map(|i| format!("0 ||| h{i} ||| f ||| -1\n")).collect();
    match parse_moses_nbest(long.as_bytes(), 2) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}

fn arb_lists() -> impl Strategy<Value = NBestMap> {
    let candidate = (
        "[a-zA-Z0-9áéñ¿?!,. \"\\\\]{0,20}[a-z]",
        prop::option::of(-50.0f64..=0.0),
    );
    let list = (
        prop::option::of("[a-zA-Z .\"]{1,20}"),
        prop::collection::vec(candidate, 1..=DEFAULT_NUM_CANDIDATES),
    );
    prop::collection::btree_map(0u64..10_000, list, 0..8).prop_map(|m| {
        m.into_iter()
            .map(|(id, (source, cands))| {
                let source = source.filter(|s| !s.is_empty());
                (
                    id,
                    NBestList::from_texts(id, source, cands, DEFAULT_NUM_CANDIDATES).unwrap(),
                )
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn jsonl_round_trip(lists in arb_lists()) {
        let mut buf = Vec::new();
        write_jsonl_nbest(&lists, &mut buf).unwrap();
        let back = parse_jsonl_nbest(buf.as_slice(), DEFAULT_NUM_CANDIDATES).unwrap();
        prop_assert_eq!(back, lists);
    }
}

#[test]
fn jsonl_rejects_duplicates_and_positive_scores() {
    let dup = "{\"id\":1,\"source\":\"a\",\"candidates\":[{\"text\":\"x\"}]}\n".repeat(2);
    assert!(matches!(
        parse_jsonl_nbest(dup.as_bytes(), 10),
        Err(Error::Parse { line: 2, .. })
    ));
    let pos = "{\"id\":1,\"source\":\"a\",\"candidates\":[{\"text\":\"x\",\"score\":0.5}]}\n";
    assert!(matches!(
        parse_jsonl_nbest(pos.as_bytes(), 10),
        Err(Error::Parse { line: 1, .. })
    ));
    let empty = "{\"id\":1,\"source\":\"a\",\"candidates\":[]}\n";
    assert!(parse_jsonl_nbest(empty.as_bytes(), 10).is_err());
}

fn translate_server(reply_count: Option<usize>) -> MockServer {
    MockServer::start(move |path, body| {
        if path != "/translate" {
            return (404, "{}".into());
        }
        let req: TranslateRequest = serde_json::from_str(body).unwrap();
        let n = reply_count.unwrap_or(req.num_candidates);
        let cands: Vec<String> = (0..n)
            .map(|i| format!("{{\"text\":\"{} #{i}\",\"score\":{}}}", req.text, -(i as f64) - 1.0))
            .collect();
        (200, format!("{{\"candidates\":[{}]}}", cands.join(",")))
    })
}

#[test]
fn backend_request_carries_defaults() {
    let server = translate_server(None);
    let backend = MtBackend::new(&server.address, "es", Duration::from_secs(5));
    let src = SourceSegment::new(4, "Very satisfying.", "en").unwrap();
    let list = backend
        .request_candidates(&src, DEFAULT_NUM_CANDIDATES, DEFAULT_BEAM_SIZE)
        .unwrap();
    assert_eq!(list.len(), 10);
    assert_eq!(list.source_id, 4);
    let (_, body) = &server.requests()[0];
    let req: TranslateRequest = serde_json::from_str(body).unwrap();
    assert_eq!(
        req,
        TranslateRequest {
            text: "Very satisfying.".into(),
            source_lang: "en".into(),
            target_lang: "es".into(),
            num_candidates: 10,
            beam_size: 10,
        }
    );
}

#[test]
fn backend_candidate_counts() {
    let server = translate_server(None);
    let backend = MtBackend::new(&server.address, "es", Duration::from_secs(5));
    let src = SourceSegment::new(0, "hi", "en").unwrap();
    assert_eq!(backend.request_candidates(&src, 1, 10).unwrap().len(), 1);
    let four = backend.request_candidates(&src, 4, 10).unwrap();
    let ranks: Vec<usize> = four.candidates().iter().map(|c| c.rank).collect();
    assert_eq!(ranks, vec![0, 1, 2, 3]);

    let chatty = translate_server(Some(12));
    let backend = MtBackend::new(&chatty.address, "es", Duration::from_secs(5));
    assert_eq!(backend.request_candidates(&src, 3, 10).unwrap().len(), 3);
}

#[test]
fn backend_empty_and_failing() {
    let server = translate_server(Some(0));
    let backend = MtBackend::new(&server.address, "es", Duration::from_secs(5));
    let src = SourceSegment::new(9, "hi", "en").unwrap();
    let err = backend.request_candidates(&src, 10, 10).unwrap_err();
    assert!(matches!(err, Error::EmptyResult(9)));
    assert_eq!(err.class(), "empty-result");

    let down = MockServer::start(|_, _| (500, "{}".into()));
    let backend = MtBackend::new(&down.address, "es", Duration::from_secs(5));
    assert_eq!(
        backend.request_candidates(&src, 10, 10).unwrap_err().class(),
        "backend-unavailable"
    );
}
