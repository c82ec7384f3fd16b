use std::collections::{BTreeMap, HashMap};

use probekit::analysis::*;
use probekit::data::{label_histogram, Dataset, ProbingExample, Span, SpanTarget, Split, TaskName, TaskSchema};
use probekit::probe::{HeadKind, LabelStats, Metrics};
use proptest::prelude::*;

fn vertex_data(words: &[String], labels: &[usize]) -> Dataset {
    let schema = TaskSchema::builtin(TaskName::Monotonicity);
    let examples = words
        .chunks(3)
        .zip(labels.chunks(3))
        .enumerate()
        .map(|(i, (w, l))| ProbingExample {
            id: format!("e{i}"),
            tokens: w.to_vec(),
            targets: l
                .iter()
                .enumerate()
                .map(|(j, &l)| SpanTarget::vertex(Span::new(j, j + 1), schema.labels[l % 3].clone()))
                .collect(),
        })
        .collect();
    Dataset::new(schema, Split::Train, examples)
}

fn data_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..40).prop_flat_map(|n| {
        (
            proptest::collection::vec("[a-e]{1,2}", n * 3),
            proptest::collection::vec(0usize..3, n * 3),
        )
            .prop_map(|(w, l)| vertex_data(&w, &l))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn control_labels_are_functions_of_type(d in data_strategy(), seed in any::<u64>(), uniform in any::<bool>()) {
        let spec = ControlSpec { seed, sampling: if uniform { ControlSampling::Uniform } else { ControlSampling::EmpiricalMarginal } };
        let task = ControlTask::fit(&d, &spec);
        let c = task.apply(&d);
        prop_assert_eq!(c.num_targets(), d.num_targets());
        let mut seen: HashMap<Vec<String>, String> = HashMap::new();
        for (e, t) in c.targets() {
            prop_assert!(c.schema.label_index(&t.label).is_some());
            let key = type_key(e, t);
            let prev = seen.entry(key).or_insert_with(|| t.label.clone());
            prop_assert_eq!(&*prev, &t.label);
        }
        // spans and tokens are untouched
        for (a, b) in c.examples.iter().zip(&d.examples) {
            prop_assert_eq!(&a.tokens, &b.tokens);
            prop_assert!(a.targets.iter().zip(&b.targets).all(|(x, y)| x.span1 == y.span1 && x.span2 == y.span2));
        }
        prop_assert_eq!(make_control(&d, &spec), c);
        // empirical sampling never produces labels absent from the source
        if !uniform {
            let hist = label_histogram(&d);
            for (_, t) in task.apply(&d).targets() {
                prop_assert!(hist.contains_key(&t.label));
            }
        }
        let total: f64 = task.distribution().iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn entropy_is_bounded(counts in proptest::collection::vec(0usize..50, 1..8)) {
        let hist: BTreeMap<usize, usize> = counts.iter().copied().enumerate().collect();
        let h = entropy_bits(&hist);
        let k = counts.iter().filter(|&&c| c > 0).count();
        prop_assert!(h >= -1e-12);
        if k > 0 {
            prop_assert!(h <= (k as f64).log2() + 1e-9);
        }
        if k == 1 {
            prop_assert!(h.abs() < 1e-12);
        }
    }

    #[test]
    fn gain_and_percent_agree(base in 0.0f64..5.0, target in 0.0f64..5.0) {
        let g = info_gain(base, target);
        prop_assert!((g.gain_bits - (base - target)).abs() < 1e-12);
        match g.percent {
            Some(p) => {
                prop_assert!(base > 0.0);
                prop_assert!((p / 100.0 * base - g.gain_bits).abs() < 1e-9);
                prop_assert_eq!(p.signum() == g.gain_bits.signum() || g.gain_bits == 0.0, true);
            }
            None => prop_assert!(base <= 0.0),
        }
    }

    #[test]
    fn selectivity_is_a_difference(a in 0.0f64..100.0, c in 0.0f64..100.0) {
        prop_assert!((selectivity(a, c) - (a - c)).abs() < 1e-12);
        let cell = format_accuracy_cell(a, Some(selectivity(a, c)));
        let want = format!("{a:.1} ({:.1})", a - c);
        prop_assert_eq!(cell, want);
    }
}

#[test]
fn uniform_control_matches_closed_form_frequencies() {
    let words: Vec<String> = (0..6000).map(|i| format!("t{i}")).collect();
    let d = vertex_data(&words, &vec![0; 6000]);
    let c = make_control(&d, &ControlSpec { seed: 3, sampling: ControlSampling::Uniform });
    let hist = label_histogram(&c);
    for (label, n) in &hist {
        let frac = *n as f64 / 6000.0;
        assert!((frac - 1.0 / 3.0).abs() < 0.03, "{label}: {frac}");
    }
    // empirical: one observed label gets all the mass
    let e = make_control(&d, &ControlSpec::default());
    assert_eq!(label_histogram(&e).len(), 1);
}

fn metrics(acc: f64, ce: f64) -> Metrics {
    let mut per_label = BTreeMap::new();
    per_label.insert("Aligned".to_string(), LabelStats { correct: (acc * 100.0) as usize, total: 100 });
    Metrics { accuracy: acc, correct: (acc * 100.0) as usize, total: 100, per_label, ce_bits: ce }
}

fn outcome(provider: &str, head: HeadKind, acc: f64, ce: f64, control: Option<f64>) -> RunOutcome {
    RunOutcome {
        task: TaskName::SaAp,
        provider: provider.into(),
        head,
        seed: 1,
        metrics: metrics(acc, ce),
        control: control.map(|c| metrics(c, 1.0)),
    }
}

#[test]
fn report_rows_pick_the_best_baseline_per_head() {
    let runs = vec![
        outcome("glove", HeadKind::Linear, 0.6, 1.4, Some(0.5)),
        outcome("random", HeadKind::Linear, 0.5, 1.6, Some(0.5)),
        outcome("bert", HeadKind::Linear, 0.918, 1.3, Some(0.498)),
        outcome("bert", HeadKind::Mlp, 0.95, 0.9, None),
        outcome("random", HeadKind::Mlp, 0.5, 1.0, None),
    ];
    let options = ReportOptions { require_control: false, baselines: vec!["glove".into(), "random".into()] };
    let set = assemble_report(&runs, &options).unwrap();
    let bert = &set.runs[2];
    assert_eq!(bert.accuracy_cell(), "91.8 (42.0)");
    let g = bert.gain.as_ref().unwrap();
    assert_eq!(g.baseline, "glove");
    assert!((g.gain_bits - 0.1).abs() < 1e-12);
    assert_eq!(set.runs[3].gain.as_ref().unwrap().baseline, "random");
    assert!(set.runs[0].gain.is_none());

    let strict = ReportOptions { require_control: true, ..options.clone() };
    assert!(matches!(assemble_report(&runs, &strict), Err(AnalysisError::MissingControl { .. })));

    let json = set.to_json();
    assert_eq!(ReportSet::from_json(&json).unwrap(), set);
    assert_eq!(ReportSet::from_json(&json).unwrap().to_json(), json);
    let csv = set.to_csv().unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().next().unwrap().starts_with("task,provider,head,seed,accuracy"));
    let merged = ReportSet::merge([ReportSet { runs: set.runs[2..].to_vec() }, ReportSet { runs: set.runs[..2].to_vec() }]);
    assert_eq!(merged.runs[0].provider, "bert");
    assert_eq!(ReportSet::merge([merged.clone()]), merged);
}

#[test]
fn empirical_control_matches_the_marginal_over_ten_thousand_targets() {
    // 60% / 30% / 10% marginal over 10,000 distinct token types
    let words: Vec<String> = (0..10_000).map(|i| format!("tok{i}")).collect();
    let labels: Vec<usize> = (0..10_000).map(|i| if i % 10 < 6 { 0 } else if i % 10 < 9 { 1 } else { 2 }).collect();
    let d = vertex_data(&words, &labels);
    assert_eq!(d.num_targets(), 10_000);
    let original = label_histogram(&d);
    let c = make_control(&d, &ControlSpec { seed: 8, sampling: ControlSampling::EmpiricalMarginal });
    let control = label_histogram(&c);
    for (label, n) in &original {
        let want = *n as f64 / 100.0;
        let got = control.get(label).copied().unwrap_or(0) as f64 / 100.0;
        assert!((want - got).abs() <= 3.0, "{label}: {want}% vs {got}%");
    }
    assert_eq!(make_control(&d, &ControlSpec { seed: 8, sampling: ControlSampling::EmpiricalMarginal }), c);
}
