use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{backward, Instance, ProbeConfig, ProbeError, ProbeModel};
use crate::data::{Dataset, ProbingExample, TaskSchema};
use crate::embeddings::{EmbeddingMatrix, EmbeddingProvider};

/// A trained probe with the settings that produced it and the mean training
/// loss (nats) of every epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedProbe {
    pub model: ProbeModel,
    pub config: ProbeConfig,
    pub schema: TaskSchema,
    pub log: Vec<f64>,
}

/// Encodes every example, checking row counts and the provider dimension.
///
/// Encoding runs in parallel; results keep dataset order.
pub fn encode_examples<P: EmbeddingProvider + ?Sized>(
    examples: &[ProbingExample],
    provider: &P,
) -> Result<Vec<EmbeddingMatrix>, ProbeError> {
    examples
        .par_iter()
        .map(|ex| {
            let e = provider.encode(ex)?;
            if e.n_tokens() != ex.tokens.len() {
                return Err(ProbeError::Embedding(crate::embeddings::EmbeddingError::RowCount {
                    id: ex.id.clone(),
                    expected: ex.tokens.len(),
                    found: e.n_tokens(),
                }));
            }
            if e.dim() != provider.dim() {
                return Err(ProbeError::DimMismatch { expected: provider.dim(), found: e.dim() });
            }
            Ok(e)
        })
        .collect()
}

/// Training instances in dataset order.
pub(crate) fn instances<'a>(
    schema: &TaskSchema,
    examples: &'a [ProbingExample],
    embeddings: &'a [EmbeddingMatrix],
) -> Result<Vec<Instance<'a>>, ProbeError> {
    assert_eq!(examples.len(), embeddings.len(), "one matrix per example");
    let mut out = Vec::new();
    for (ex, e) in examples.iter().zip(embeddings) {
        for target in &ex.targets {
            let label = schema
                .label_index(&target.label)
                .ok_or_else(|| ProbeError::UnknownLabel(target.label.clone()))?;
            out.push(Instance { embeddings: e, target, label });
        }
    }
    Ok(out)
}

/// Trains a probe on `dataset` with vectors from `provider`.
///
/// Initialisation, per-epoch shuffling and therefore the whole trajectory
/// derive from `config.seed`.
pub fn train<P: EmbeddingProvider + ?Sized>(
    dataset: &Dataset,
    provider: &P,
    config: &ProbeConfig,
) -> Result<TrainedProbe, ProbeError> {
    config.validate()?;
    let embeddings = encode_examples(&dataset.examples, provider)?;
    train_encoded(&dataset.schema, &dataset.examples, &embeddings, config)
}

/// [`train`] over already encoded examples.
pub fn train_encoded(
    schema: &TaskSchema,
    examples: &[ProbingExample],
    embeddings: &[EmbeddingMatrix],
    config: &ProbeConfig,
) -> Result<TrainedProbe, ProbeError> {
    config.validate()?;
    let input_dim = embeddings.first().map(EmbeddingMatrix::dim).ok_or(ProbeError::Empty)?;
    let data = instances(schema, examples, embeddings)?;
    if data.is_empty() {
        return Err(ProbeError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model =
        ProbeModel::init(config, schema.probe_type, input_dim, schema.num_labels(), &mut rng)?;

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut batch = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i]));
            let (grads, mean) = backward(&model, &batch)?;
            total += mean * chunk.len() as f64;
            model.adam_step(&grads, config.learning_rate, &config.adam);
        }
        let mean = total / data.len() as f64;
        log::debug!("epoch {}: mean loss {mean:.6}", epoch + 1);
        log.push(mean);
    }
    Ok(TrainedProbe {
        model,
        config: config.clone(),
        schema: schema.clone(),
        log,
    })
}
