use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{decide, loss};
use super::train::{encode_examples, instances};
use super::{forward, ProbeError, TrainedProbe};
use crate::data::{Dataset, ProbingExample, TaskSchema};
use crate::embeddings::{EmbeddingMatrix, EmbeddingProvider};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub correct: usize,
    pub total: usize,
}

impl LabelStats {
    /// Fraction correct, or `None` without targets.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

/// Test-set results. `accuracy` is a fraction in `[0, 1]`; per-label stats are
/// keyed by gold label; `ce_bits` is the mean cross-entropy per target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub per_label: BTreeMap<String, LabelStats>,
    pub ce_bits: f64,
}

fn check_schema(trained: &TaskSchema, given: &TaskSchema) -> Result<(), ProbeError> {
    if trained.name != given.name {
        return Err(ProbeError::SchemaMismatch { trained: trained.name, given: given.name });
    }
    let mut a = trained.labels.clone();
    let mut b = given.labels.clone();
    a.sort();
    b.sort();
    if a != b || trained.probe_type != given.probe_type {
        return Err(ProbeError::LabelMismatch);
    }
    Ok(())
}

/// Evaluates `probe` on a test dataset.
pub fn evaluate<P: EmbeddingProvider + ?Sized>(
    probe: &TrainedProbe,
    dataset: &Dataset,
    provider: &P,
) -> Result<Metrics, ProbeError> {
    check_schema(&probe.schema, &dataset.schema)?;
    let embeddings = encode_examples(&dataset.examples, provider)?;
    evaluate_encoded(probe, &dataset.schema, &dataset.examples, &embeddings)
}

/// [`evaluate`] over already encoded examples.
pub fn evaluate_encoded(
    probe: &TrainedProbe,
    schema: &TaskSchema,
    examples: &[ProbingExample],
    embeddings: &[EmbeddingMatrix],
) -> Result<Metrics, ProbeError> {
    check_schema(&probe.schema, schema)?;
    // label indices always follow the probe's own schema order
    let data = instances(&probe.schema, examples, embeddings)?;
    if data.is_empty() {
        return Err(ProbeError::Empty);
    }
    let model = &probe.model;
    let scored: Vec<(usize, usize, f64)> = data
        .par_iter()
        .map(|inst| {
            let z = forward(model, inst.embeddings, inst.target)?;
            let z = z.as_slice().expect("contiguous");
            Ok((inst.label, decide(z, model.loss), loss(z, inst.label, model.loss)?))
        })
        .collect::<Result<_, ProbeError>>()?;

    let mut per_label: BTreeMap<String, LabelStats> = BTreeMap::new();
    let mut correct = 0;
    let mut nats = 0.0;
    for &(gold, pred, l) in &scored {
        let stats = per_label.entry(probe.schema.labels[gold].clone()).or_default();
        stats.total += 1;
        if gold == pred {
            stats.correct += 1;
            correct += 1;
        }
        nats += l;
    }
    let total = scored.len();
    Ok(Metrics {
        accuracy: correct as f64 / total as f64,
        correct,
        total,
        per_label,
        ce_bits: nats / total as f64 / LN_2,
    })
}

/// Predicted label for every target of `example`.
pub fn predict(
    probe: &TrainedProbe,
    example: &ProbingExample,
    embeddings: &EmbeddingMatrix,
) -> Result<Vec<String>, ProbeError> {
    example
        .targets
        .iter()
        .map(|t| {
            let z = forward(&probe.model, embeddings, t)?;
            let i = decide(z.as_slice().expect("contiguous"), probe.model.loss);
            Ok(probe.schema.labels[i].clone())
        })
        .collect()
}
