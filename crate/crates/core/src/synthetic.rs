//! Planted-signal tasks.
//!
//! Each example has a few tokens with fresh standard-normal contextual
//! vectors and one edge target between tokens 0 and 1. The label is a known
//! function of the two target vectors, so the accuracy a probe should reach
//! is known in advance. Token strings come from a small vocabulary and carry
//! no signal; a control task keyed on them has nothing to learn.
//!
//! ```
//! use probekit::synthetic::{planted_task, PlantedRule, PlantedSpec};
//! let task = planted_task(&PlantedSpec { rule: PlantedRule::Xor, n_train: 10, n_test: 5, ..PlantedSpec::default() });
//! assert_eq!(task.train.examples.len(), 10);
//! assert_eq!(task.embeddings.len(), 15);
//! ```

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ProbingExample, Span, SpanTarget, Split, TaskName, TaskSchema};
use crate::embeddings::{ContextualEmbeddings, EmbeddingMatrix};

/// How the label depends on the span vectors `x` (token 0) and `y`
/// (token 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantedRule {
    /// Sign of `w · [x; y]` for a fixed random direction `w`.
    Linear,
    /// `x[0] > 0` xor `y[0] > 0`.
    Xor,
    /// A fair coin, independent of the vectors.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedSpec {
    pub rule: PlantedRule,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    pub tokens_per_example: usize,
    pub vocab_size: usize,
    /// Examples whose deciding quantity lies within `margin` of the
    /// boundary are redrawn.
    pub margin: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            rule: PlantedRule::Linear,
            n_train: 1000,
            n_test: 500,
            dim: 8,
            tokens_per_example: 4,
            vocab_size: 50,
            margin: 0.0,
            seed: 0,
        }
    }
}

/// Train and test sets of an `SA-AP`-shaped edge task with their vectors.
#[derive(Clone, Debug)]
pub struct PlantedTask {
    pub train: Dataset,
    pub test: Dataset,
    pub embeddings: ContextualEmbeddings,
}

pub fn planted_task(spec: &PlantedSpec) -> PlantedTask {
    assert!(spec.dim > 0 && spec.tokens_per_example >= 2 && spec.vocab_size > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let direction: Vec<f64> = (0..2 * spec.dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();

    let positive = |rows: &Array2<f32>, rng: &mut ChaCha8Rng| -> Option<bool> {
        let (x, y) = (rows.row(0), rows.row(1));
        match spec.rule {
            PlantedRule::Linear => {
                let s: f64 = x
                    .iter()
                    .chain(y.iter())
                    .zip(&direction)
                    .map(|(v, w)| *v as f64 * w)
                    .sum::<f64>()
                    / norm;
                (s.abs() >= spec.margin).then_some(s > 0.0)
            }
            PlantedRule::Xor => {
                let (a, b) = (x[0] as f64, y[0] as f64);
                (a.abs() >= spec.margin && b.abs() >= spec.margin).then_some((a > 0.0) != (b > 0.0))
            }
            PlantedRule::Independent => Some(rng.random_bool(0.5)),
        }
    };

    let schema = TaskSchema::builtin(TaskName::SaAp);
    let mut matrices = Vec::new();
    let mut build = |split: Split, n: usize, rng: &mut ChaCha8Rng| {
        let mut examples = Vec::with_capacity(n);
        for i in 0..n {
            let (rows, label) = loop {
                let rows = Array2::from_shape_fn((spec.tokens_per_example, spec.dim), |_| rng.sample::<f32, _>(StandardNormal));
                if let Some(label) = positive(&rows, rng) {
                    break (rows, label);
                }
            };
            let id = format!("planted-{}-{i}", if split == Split::Train { "train" } else { "test" });
            let tokens = (0..spec.tokens_per_example)
                .map(|_| format!("w{}", rng.random_range(0..spec.vocab_size)))
                .collect();
            let label = if label { "Aligned" } else { "Unaligned" };
            examples.push(ProbingExample {
                id: id.clone(),
                targets: vec![SpanTarget::edge(Span::new(0, 1), Span::new(1, 2), label)],
                tokens,
            });
            matrices.push((id, EmbeddingMatrix::new(rows).expect("normal samples are finite")));
        }
        Dataset::new(schema.clone(), split, examples)
    };
    let train = build(Split::Train, spec.n_train, &mut rng);
    let test = build(Split::Test, spec.n_test, &mut rng);
    let embeddings = ContextualEmbeddings::from_matrices(matrices).expect("ids are unique and dims agree");
    PlantedTask { train, test, embeddings }
}
