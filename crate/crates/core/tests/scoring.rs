mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use sentimt_core::scoring::ngram::{parse_training_corpus, Label};
use sentimt_core::scoring::remote::{ScoreRequest, ScoreResponse};
use sentimt_core::scoring::{
    expected_class_value, score_batch, score_text, softmax, train_ngram_scorer, Backend, ClassDistribution,
    LexiconScorer, NgramModel, NgramScorer, RemoteScorer, ScorerSpec, SentimentScorer, TrainConfig,
};
use sentimt_core::Error;

use common::MockServer;

#[test]
fn softmax_matches_extended_precision_fixture() {
    // e^1 / (e^1 + e^3) and e^3 / (e^1 + e^3), evaluated at 50 digits
    let p = softmax(&[1.0, 3.0]).unwrap();
    assert!((p[0] - 0.119_202_922_022_117_555_940_270_858_697_6).abs() < 1e-15);
    assert!((p[1] - 0.880_797_077_977_882_444_059_729_141_302_4).abs() < 1e-15);
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) },
        )
        .0
}

proptest! {
    #[test]
    fn softmax_normalized_and_argmax_preserving(logits in prop::collection::vec(-700.0f64..700.0, 2..=16)) {
        let p = softmax(&logits).unwrap();
        prop_assert_eq!(p.len(), logits.len());
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert_eq!(argmax(&p), argmax(&logits));
    }

    #[test]
    fn softmax_moderate_logits_strictly_positive(logits in prop::collection::vec(-50.0f64..50.0, 2..=16)) {
        let p = softmax(&logits).unwrap();
        prop_assert!(p.iter().all(|&x| x > 0.0 && x <= 1.0));
    }

    #[test]
    fn softmax_shift_invariant(logits in prop::collection::vec(-20.0f64..20.0, 1..=16), c in -100.0f64..100.0) {
        let a = softmax(&logits).unwrap();
        let shifted: Vec<f64> = logits.iter().map(|x| x + c).collect();
        let b = softmax(&shifted).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_score_is_positive_probability(p in 0.0f64..=1.0) {
        let d = ClassDistribution::binary(p).unwrap();
        prop_assert_eq!(expected_class_value(&d).unwrap(), d.probabilities()[1]);
    }

    #[test]
    fn expected_value_monotone_in_top_mass(
        raw in prop::collection::vec(0.01f64..1.0, 2..=6),
        frac in 0.0f64..=1.0,
    ) {
        let m = raw.len();
        let total: f64 = raw.iter().sum();
        let mut probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let fix = 1.0 - probs.iter().sum::<f64>();
        probs[0] += fix;
        let values: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        let labels: Vec<String> = (0..m).map(|i| i.to_string()).collect();
        let before = ClassDistribution::new(probs.clone(), values.clone(), labels.clone()).unwrap();
        let moved = probs[0] * frac;
        probs[0] -= moved;
        probs[m - 1] += moved;
        let after = ClassDistribution::new(probs, values, labels).unwrap();
        let (s0, s1) = (expected_class_value(&before).unwrap(), expected_class_value(&after).unwrap());
        prop_assert!(s1 >= s0 - 1e-12, "{} -> {}", s0, s1);
        prop_assert!((0.0..=1.0).contains(&s0));
    }

    #[test]
    fn lexicon_scores_in_unit_interval(words in prop::collection::vec("[a-z]{1,8}|good|bad|awful|great", 1..12)) {
        let scorer = LexiconScorer::builtin("en").unwrap();
        let text = words.join(" ");
        let s = score_text(&text, &scorer).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.value));
        prop_assert_eq!(s.value.to_bits(), score_text(&text, &scorer).unwrap().value.to_bits());
    }
}

#[test]
fn lexicon_saturated_text_uses_fixed_slope() {
    // all hits have polarity +1: sigmoid(2 * 1)
    let scorer = ScorerSpec::new(Backend::Lexicon, "en").resolve().unwrap();
    let s = score_text("Great! Wonderful, amazing.", scorer.as_ref()).unwrap();
    assert!((s.value - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
    assert_eq!(s.scorer_id, "lexicon:en");
}

#[test]
fn lexicon_unknown_language() {
    let err = ScorerSpec::new(Backend::Lexicon, "tlh").resolve().err().unwrap();
    assert_eq!(err.class(), "unsupported-language");
}

#[test]
fn lexicon_file_backend() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lex.tsv");
    std::fs::write(&path, "chido\t1\ngacho\t-0.5\n").unwrap();
    let scorer = ScorerSpec::new(Backend::Lexicon, "es-mx")
        .with_param("path", path.to_str().unwrap())
        .resolve()
        .unwrap();
    let s = score_text("muy gacho", scorer.as_ref()).unwrap();
    assert!((s.value - 1.0 / (1.0 + 1.0f64.exp())).abs() < 1e-15);
}

fn fixture_model() -> NgramModel {
    NgramModel::new(
        vec![1, 2],
        vec!["good".into(), "bad".into(), "not good".into(), "very".into()],
        vec![1.5, -2.0, -3.0, 0.25],
        -0.1,
    )
    .unwrap()
}

#[test]
fn ngram_matches_hand_computed_logistic() {
    // tokens: not good very very good
    // counts: good x2, very x2, "not good" x1; other n-grams out of vocabulary
    // z = 1.5*2 + 0.25*2 - 3.0*1 - 0.1 = 0.4
    let z: f64 = 1.5 * 2.0 + 0.25 * 2.0 - 3.0 - 0.1;
    let expected = 1.0 / (1.0 + (-z).exp());
    let scorer = NgramScorer::new("en", fixture_model());
    let s = score_text("Not good, very very good!", &scorer).unwrap();
    assert!((s.value - expected).abs() < 1e-15);
    assert!((expected - 0.598_687_660_112_452_3).abs() < 1e-15);
}

#[test]
fn ngram_artifact_round_trip_through_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    fixture_model().save(&path).unwrap();
    let raw = std::fs::read_to_string(&path).unwrap();
    for key in [
        "\"format\"",
        "\"version\"",
        "\"vocabulary\"",
        "\"weights\"",
        "\"bias\"",
        "\"orders\"",
        "\"normalization\"",
    ] {
        assert!(raw.contains(key), "artifact lacks {key}");
    }
    let scorer = ScorerSpec::new(Backend::NgramLogistic, "en")
        .with_param("model", path.to_str().unwrap())
        .resolve()
        .unwrap();
    let direct = NgramScorer::new("en", fixture_model());
    let text = "very bad, not good";
    assert_eq!(
        score_text(text, scorer.as_ref()).unwrap().value,
        score_text(text, &direct).unwrap().value
    );
}

#[test]
fn score_file_backend_through_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scores.tsv");
    std::fs::write(&path, "hola mundo\t0.42\n").unwrap();
    let scorer = ScorerSpec::new(Backend::ScoreFile, "es")
        .with_param("path", path.to_str().unwrap())
        .resolve()
        .unwrap();
    assert_eq!(score_text("Hola mundo", scorer.as_ref()).unwrap().value, 0.42);
}

#[test]
fn batch_equals_elementwise_map() {
    let texts: Vec<String> = (0..100)
        .map(|i| match i % 4 {
            0 => format!("great day number {i}"),
            1 => format!("awful service {i}, not good"),
            2 => format!("very very good {i}"),
            _ => format!("plain text {i}"),
        })
        .collect();
    let scorers: Vec<Box<dyn SentimentScorer>> = vec![
        Box::new(LexiconScorer::builtin("en").unwrap()),
        Box::new(NgramScorer::new("en", fixture_model())),
    ];
    for scorer in &scorers {
        let batch = score_batch(&texts, scorer.as_ref()).unwrap();
        let mapped: Vec<_> = texts.iter().map(|t| score_text(t, scorer.as_ref()).unwrap()).collect();
        assert_eq!(batch, mapped);
    }
    let one = score_batch(&texts[..1], scorers[0].as_ref()).unwrap();
    assert_eq!(one, vec![score_text(&texts[0], scorers[0].as_ref()).unwrap()]);
}

fn toy_corpus() -> Vec<(String, Label)> {
    let pos = ["great", "wonderful", "love", "excellent", "happy"];
    let neg = ["awful", "terrible", "hate", "horrible", "sad"];
    let mut out = Vec::new();
    for (i, w) in pos.iter().enumerate() {
        out.push((format!("what a {w} movie"), Label::Positive));
        out.push((format!("i feel {w} today {i}"), Label::Positive));
    }
    for (i, w) in neg.iter().enumerate() {
        out.push((format!("what a {w} movie"), Label::Negative));
        out.push((format!("i feel {w} today {i}"), Label::Negative));
    }
    out
}

#[test]
fn separable_corpus_trains_to_full_accuracy() {
    let corpus = toy_corpus();
    assert_eq!(corpus.len(), 20);
    let (model, report) = train_ngram_scorer(&corpus, &TrainConfig::default()).unwrap();
    assert_eq!(report.training_accuracy, 1.0);
    assert!(report.converged);
    assert_eq!(report.train_size + report.held_out_size, 20);
    assert!(report.held_out_accuracy.is_some());
    assert_eq!(model.orders, vec![1, 2]);
}

#[test]
fn training_is_deterministic_for_a_seed() {
    let corpus = toy_corpus();
    let cfg = TrainConfig {
        seed: 11,
        ..TrainConfig::default()
    };
    let (a, ra) = train_ngram_scorer(&corpus, &cfg).unwrap();
    let (b, rb) = train_ngram_scorer(&corpus, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}

#[test]
fn flipped_labels_mirror_scores() {
    let corpus = toy_corpus();
    let flipped: Vec<(String, Label)> = corpus.iter().map(|(t, l)| (t.clone(), l.flipped())).collect();
    let cfg = TrainConfig {
        holdout: 0.0,
        ..TrainConfig::default()
    };
    let (model, _) = train_ngram_scorer(&corpus, &cfg).unwrap();
    let (mirror, _) = train_ngram_scorer(&flipped, &cfg).unwrap();
    for (text, _) in &corpus {
        let p = model.positive_probability(text);
        let q = mirror.positive_probability(text);
        assert!((p + q - 1.0).abs() < 1e-6, "{text}: {p} vs {q}");
        assert_ne!(p >= 0.5, q >= 0.5, "argmax not flipped for {text}");
    }
}

#[test]
fn training_corpus_file_format() {
    let corpus = parse_training_corpus("positive\tlove it\nnegative\thate it\n").unwrap();
    let (_, report) = train_ngram_scorer(
        &corpus,
        &TrainConfig::from_map(&BTreeMap::from([("holdout".to_string(), "0".to_string())])).unwrap(),
    )
    .unwrap();
    assert_eq!(report.training_accuracy, 1.0);
    assert_eq!(report.held_out_accuracy, None);
}

#[derive(serde::Deserialize)]
struct Golden {
    request: ScoreRequest,
    response: ScoreResponse,
}

fn golden() -> Golden {
    serde_json::from_str(include_str!("fixtures/remote_scorer_golden.json")).unwrap()
}

#[test]
fn remote_client_replays_golden_exchange() {
    let g = golden();
    let expected_request = g.request.clone();
    let reply = serde_json::to_string(&g.response).unwrap();
    let server = MockServer::start(move |path, body| {
        let req: ScoreRequest = serde_json::from_str(body).unwrap();
        if path == "/score" && req == expected_request {
            (200, reply.clone())
        } else {
            (400, "{\"error\":\"unexpected request\"}".into())
        }
    });
    let spec = ScorerSpec::new(Backend::Remote, "en").with_param("address", &server.address);
    let scorer = spec.resolve().unwrap();
    let texts: Vec<&str> = g.request.texts.iter().map(String::as_str).collect();
    let scores = score_batch(&texts, scorer.as_ref()).unwrap();
    for (s, expected) in scores.iter().zip(&g.response.scores) {
        assert!((s.value - expected).abs() < 1e-6);
        assert!(s.scorer_id.starts_with("remote:en@"));
    }
    // one request for the whole batch
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn remote_error_statuses() {
    let server = MockServer::start(|_, _| (503, "{}".into()));
    let scorer = RemoteScorer::new(&server.address, "en", std::time::Duration::from_secs(5));
    let err = score_text("hello", &scorer).unwrap_err();
    assert_eq!(err.class(), "backend-unavailable");

    let server = MockServer::start(|_, _| (200, "{\"scores\": [0.5]}".into()));
    let scorer = RemoteScorer::new(&server.address, "en", std::time::Duration::from_secs(5));
    let err = score_text("hello", &scorer).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)));
}

#[test]
fn remote_three_class_distribution() {
    let server = MockServer::start(|_, _| {
        (
            200,
            r#"{"scores":[0.625],"probabilities":[[0.25,0.25,0.5]],"class_values":[0.0,0.5,1.0]}"#.into(),
        )
    });
    let scorer = RemoteScorer::new(&server.address, "en", std::time::Duration::from_secs(5));
    let s = score_text("meh", &scorer).unwrap();
    assert!((s.value - 0.625).abs() < 1e-12);
    assert_eq!(s.distribution.unwrap().probabilities().len(), 3);
}
