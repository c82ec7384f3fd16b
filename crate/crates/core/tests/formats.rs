use std::io::Cursor;

use probekit::data::{
    decode_record, read_records, to_canonical_line, write_examples, ProbingExample, Span,
    SpanTarget, TaskName, TaskSchema,
};
use probekit::embeddings::{
    read_contextual, read_contextual_file, read_static, write_contextual, ContextualRecord, EmbeddingMatrix,
    EmbeddingProvider, StaticFormat,
};
use probekit::taskgen::{emit_conllu, parse_conllu};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UD50: &str = include_str!("fixtures/ud50.conllu");

fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z]{1,8}",
        "\\PC{1,6}",
        Just("\"quoted\\\"".to_string()),
        Just("<sep>".to_string()),
        Just("naïve\u{2014}ß".to_string()),
    ]
}

fn example(schema: TaskSchema) -> impl Strategy<Value = ProbingExample> {
    let edge = schema.probe_type == probekit::data::ProbeType::Edge;
    (proptest::collection::vec(token(), 1..12), "[ -~]{0,12}").prop_flat_map(move |(tokens, id)| {
        let n = tokens.len();
        let labels = schema.labels.clone();
        let span = move || (0..n).prop_flat_map(move |s| (Just(s), s + 1..=n)).prop_map(|(s, e)| Span::new(s, e));
        let target = (span(), span(), 0..labels.len(), 0..n).prop_map(move |(a, b, l, v)| {
            if edge {
                SpanTarget::edge(a, b, labels[l].clone())
            } else {
                SpanTarget::vertex(Span::new(v, v + 1), labels[l].clone())
            }
        });
        proptest::collection::vec(target, 0..6)
            .prop_map(move |targets| ProbingExample { id: id.clone(), targets, tokens: tokens.clone() })
    })
}

fn any_schema() -> impl Strategy<Value = TaskSchema> {
    proptest::sample::select(TaskName::ALL.to_vec()).prop_map(TaskSchema::builtin)
}

fn finite_f32() -> impl Strategy<Value = f32> {
    prop_oneof![
        any::<f32>().prop_filter("finite", |v| v.is_finite()),
        Just(f32::MIN_POSITIVE / 4.0),
        Just(f32::MAX),
        Just(-0.0),
        -1.0f32..1.0,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dataset_record_round_trips(e in any_schema().prop_flat_map(example)) {
        let line = to_canonical_line(&e);
        let back = decode_record(&line).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(to_canonical_line(&back), line);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contextual_file_round_trips(
        rows in proptest::collection::vec(proptest::collection::vec(finite_f32(), 3), 1..6),
        gzip in any::<bool>(),
    ) {
        let m = EmbeddingMatrix::from_rows(&rows).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(if gzip { "e.jsonl.gz" } else { "e.jsonl" });
        let records = vec![ContextualRecord::new("x", &m), ContextualRecord::new("y", &m)];
        write_contextual(&path, &records, gzip).unwrap();
        let back = read_contextual_file(&path).unwrap();
        prop_assert_eq!(&back, &records);
        for (a, b) in back[0].vectors.iter().flatten().zip(rows.iter().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        let again = dir.path().join("again.jsonl");
        let plain = dir.path().join("plain.jsonl");
        write_contextual(&again, &back, false).unwrap();
        write_contextual(&plain, &records, false).unwrap();
        prop_assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&plain).unwrap());
    }
}

/// 1,000 records written, read and rewritten give the same bytes.
#[test]
fn thousand_record_file_is_byte_stable() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = proptest::collection::vec(any_schema().prop_flat_map(example), 1000);
    let examples = strategy.new_tree(&mut runner).unwrap().current();
    let mut first = Vec::new();
    write_examples(&mut first, &examples).unwrap();
    let back: Vec<ProbingExample> =
        read_records(Cursor::new(&first)).into_iter().map(|(_, r)| r.unwrap()).collect();
    assert_eq!(back, examples);
    let mut second = Vec::new();
    write_examples(&mut second, &back).unwrap();
    assert_eq!(first, second);
}

#[test]
fn hundred_matrices_survive_the_provider() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.jsonl.gz");
    let mut records = Vec::new();
    for i in 0..100 {
        let n = rng.random_range(1..8);
        let rows: Vec<Vec<f32>> =
            (0..n).map(|_| (0..5).map(|_| f32::from_bits(rng.random_range(0..0x7f00_0000)) * if rng.random() { 1.0 } else { -1.0 }).collect()).collect();
        records.push(ContextualRecord::new(format!("e{i}"), &EmbeddingMatrix::from_rows(&rows).unwrap()));
    }
    write_contextual(&path, &records, true).unwrap();
    let provider = read_contextual(&path).unwrap();
    for r in &records {
        let ex = ProbingExample { id: r.id.clone(), targets: vec![], tokens: vec!["t".into(); r.vectors.len()] };
        let m = provider.encode(&ex).unwrap();
        let got: Vec<u32> = m.as_array().iter().map(|v| v.to_bits()).collect();
        let want: Vec<u32> = r.vectors.iter().flatten().map(|v| v.to_bits()).collect();
        assert_eq!(got, want, "{}", r.id);
    }
}

#[test]
fn static_text_values_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let words: Vec<(String, Vec<f32>)> =
        (0..50).map(|i| (format!("w{i}"), (0..4).map(|_| rng.random_range(-3.0f32..3.0)).collect())).collect();
    let body: String = words
        .iter()
        .map(|(w, v)| format!("{w} {}\n", v.iter().map(f32::to_string).collect::<Vec<_>>().join(" ")))
        .collect();
    for (format, text) in [
        (StaticFormat::GloveText, body.clone()),
        (StaticFormat::Word2vecText, format!("50 4\n{body}")),
    ] {
        let vectors = read_static(Cursor::new(text), format).unwrap();
        for (w, v) in &words {
            assert_eq!(vectors.get(w).unwrap(), v.as_slice());
        }
    }
}

#[test]
fn conllu_fixture_re_emits_identical_columns() {
    let trees = parse_conllu(UD50).unwrap();
    assert_eq!(trees.len(), 50);
    let emitted = emit_conllu(&trees);
    let columns = |text: &str| -> Vec<Vec<String>> {
        text.lines()
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split('\t').map(str::to_string).collect::<Vec<_>>())
            .filter(|c| !c[0].contains('-') && !c[0].contains('.'))
            .collect()
    };
    let (a, b) = (columns(UD50), columns(&emitted));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((&x[0], &x[1], &x[6], &x[7]), (&y[0], &y[1], &y[6], &y[7]));
        assert_eq!(x, y);
    }
    assert_eq!(parse_conllu(&emitted).unwrap(), trees);
    assert_eq!(emit_conllu(&parse_conllu(&emitted).unwrap()), emitted);
}
