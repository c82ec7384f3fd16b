use probekit::analysis::{entropy_bits, info_gain, selectivity, ControlSpec, ControlTask};
use probekit::data::label_histogram;
use probekit::embeddings::RandomProvider;
use probekit::probe::{evaluate, train, HeadKind, ProbeConfig};
use probekit::synthetic::{planted_task, PlantedRule, PlantedSpec};

fn config(head: HeadKind) -> ProbeConfig {
    ProbeConfig { head, projection_dim: 16, hidden_dim: 16, learning_rate: 3e-3, epochs: 30, seed: 1, ..ProbeConfig::default() }
}

fn spec(rule: PlantedRule, margin: f64) -> PlantedSpec {
    PlantedSpec { rule, margin, n_train: 500, n_test: 250, seed: 2, ..PlantedSpec::default() }
}

#[test]
fn linear_signal_is_recovered_and_selective() {
    let t = planted_task(&spec(PlantedRule::Linear, 0.0));
    let p = train(&t.train, &t.embeddings, &config(HeadKind::Linear)).unwrap();
    let acc = evaluate(&p, &t.test, &t.embeddings).unwrap().accuracy;
    assert!(acc >= 0.95, "{acc}");

    let control = ControlTask::fit(&t.train, &ControlSpec::default());
    let pc = train(&control.apply(&t.train), &t.embeddings, &config(HeadKind::Linear)).unwrap();
    let ctrl = evaluate(&pc, &control.apply(&t.test), &t.embeddings).unwrap().accuracy;
    assert!(ctrl <= 0.62, "{ctrl}");
    assert!(selectivity(100.0 * acc, 100.0 * ctrl) >= 35.0);
}

#[test]
fn xor_needs_the_mlp() {
    let t = planted_task(&spec(PlantedRule::Xor, 0.2));
    let mlp = train(&t.train, &t.embeddings, &config(HeadKind::Mlp)).unwrap();
    let lin = train(&t.train, &t.embeddings, &config(HeadKind::Linear)).unwrap();
    let a_mlp = evaluate(&mlp, &t.test, &t.embeddings).unwrap().accuracy;
    let a_lin = evaluate(&lin, &t.test, &t.embeddings).unwrap().accuracy;
    assert!(a_mlp >= 0.9, "{a_mlp}");
    assert!(a_lin <= 0.7, "{a_lin}");
}

#[test]
fn information_estimates() {
    let t = planted_task(&spec(PlantedRule::Linear, 0.5));
    let h = entropy_bits(&label_histogram(&t.test));
    let p = train(&t.train, &t.embeddings, &config(HeadKind::Linear)).unwrap();
    let ce = evaluate(&p, &t.test, &t.embeddings).unwrap().ce_bits;
    assert!((h - ce) > h - 0.1, "H {h} CE {ce}");

    let t = planted_task(&spec(PlantedRule::Independent, 0.0));
    let random = RandomProvider::new(8, 3);
    let cfg = ProbeConfig { epochs: 5, ..config(HeadKind::Linear) };
    let target = evaluate(&train(&t.train, &t.embeddings, &cfg).unwrap(), &t.test, &t.embeddings).unwrap();
    let base = evaluate(&train(&t.train, &random, &cfg).unwrap(), &t.test, &random).unwrap();
    let g = info_gain(base.ce_bits, target.ce_bits);
    assert!(g.gain_bits.abs() <= 0.1, "{g:?}");
}

#[test]
fn random_embeddings_are_not_selective() {
    // labels live in the contextual vectors; type-keyed random vectors see only token strings
    let t = planted_task(&spec(PlantedRule::Linear, 0.0));
    let random = RandomProvider::new(8, 4);
    let cfg = config(HeadKind::Linear);
    let acc = evaluate(&train(&t.train, &random, &cfg).unwrap(), &t.test, &random).unwrap().accuracy;
    let control = ControlTask::fit(&t.train, &ControlSpec::default());
    let pc = train(&control.apply(&t.train), &random, &cfg).unwrap();
    let ctrl = evaluate(&pc, &control.apply(&t.test), &random).unwrap().accuracy;
    let sel = selectivity(100.0 * acc, 100.0 * ctrl);
    assert!(sel.abs() <= 10.0, "acc {acc} control {ctrl}");
}
