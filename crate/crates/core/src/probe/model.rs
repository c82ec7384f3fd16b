use ndarray::{Array1, Array2, ArrayView1};
use rand::distr::{Distribution, Uniform};
use rand::Rng;

use super::{HeadKind, LossKind, ProbeConfig, ProbeError};
use crate::data::ProbeType;

/// `y = W x + b` with `W` stored output-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Affine {
    pub fn zeros(n_in: usize, n_out: usize) -> Affine {
        Affine {
            weight: Array2::zeros((n_out, n_in)),
            bias: Array1::zeros(n_out),
        }
    }

    /// Glorot-uniform weights, zero bias.
    fn glorot<R: Rng>(n_in: usize, n_out: usize, rng: &mut R) -> Affine {
        let mut a = Affine::zeros(n_in, n_out);
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
        a.weight.iter_mut().for_each(|w| *w = dist.sample(rng));
        a
    }

    pub fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.weight.dot(&x) + &self.bias
    }

    pub fn n_in(&self) -> usize {
        self.weight.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weight.nrows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Head {
    Linear(Affine),
    /// `output(tanh(hidden(f)))`.
    Mlp { hidden: Affine, output: Affine },
}

/// Every trainable tensor of a probe. The same type holds gradients and
/// optimizer moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub projection: Affine,
    /// One scorer per span slot, or a single shared scorer.
    pub attention: Vec<Array1<f64>>,
    pub head: Head,
}

impl Params {
    pub fn zeros_like(&self) -> Params {
        let mut p = self.clone();
        p.for_each_tensor_mut(|_, t| t.iter_mut().for_each(|v| *v = 0.0));
        p
    }

    /// Visits tensors in a fixed order with stable names.
    pub fn for_each_tensor(&self, mut f: impl FnMut(String, &[f64])) {
        f("projection.weight".into(), slice(&self.projection.weight));
        f("projection.bias".into(), self.projection.bias.as_slice().expect("contiguous"));
        for (i, a) in self.attention.iter().enumerate() {
            f(format!("attention.{i}"), a.as_slice().expect("contiguous"));
        }
        match &self.head {
            Head::Linear(a) => {
                f("head.weight".into(), slice(&a.weight));
                f("head.bias".into(), a.bias.as_slice().expect("contiguous"));
            }
            Head::Mlp { hidden, output } => {
                f("head.hidden.weight".into(), slice(&hidden.weight));
                f("head.hidden.bias".into(), hidden.bias.as_slice().expect("contiguous"));
                f("head.output.weight".into(), slice(&output.weight));
                f("head.output.bias".into(), output.bias.as_slice().expect("contiguous"));
            }
        }
    }

    pub fn for_each_tensor_mut(&mut self, mut f: impl FnMut(String, &mut [f64])) {
        f("projection.weight".into(), slice_mut(&mut self.projection.weight));
        f("projection.bias".into(), self.projection.bias.as_slice_mut().expect("contiguous"));
        for (i, a) in self.attention.iter_mut().enumerate() {
            f(format!("attention.{i}"), a.as_slice_mut().expect("contiguous"));
        }
        match &mut self.head {
            Head::Linear(a) => {
                f("head.weight".into(), slice_mut(&mut a.weight));
                f("head.bias".into(), a.bias.as_slice_mut().expect("contiguous"));
            }
            Head::Mlp { hidden, output } => {
                f("head.hidden.weight".into(), slice_mut(&mut hidden.weight));
                f("head.hidden.bias".into(), hidden.bias.as_slice_mut().expect("contiguous"));
                f("head.output.weight".into(), slice_mut(&mut output.weight));
                f("head.output.bias".into(), output.bias.as_slice_mut().expect("contiguous"));
            }
        }
    }

    /// Tensor shapes in visiting order.
    pub fn shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = vec![
            ("projection.weight".to_string(), self.projection.weight.shape().to_vec()),
            ("projection.bias".to_string(), self.projection.bias.shape().to_vec()),
        ];
        for (i, a) in self.attention.iter().enumerate() {
            out.push((format!("attention.{i}"), a.shape().to_vec()));
        }
        match &self.head {
            Head::Linear(a) => {
                out.push(("head.weight".into(), a.weight.shape().to_vec()));
                out.push(("head.bias".into(), a.bias.shape().to_vec()));
            }
            Head::Mlp { hidden, output } => {
                out.push(("head.hidden.weight".into(), hidden.weight.shape().to_vec()));
                out.push(("head.hidden.bias".into(), hidden.bias.shape().to_vec()));
                out.push(("head.output.weight".into(), output.weight.shape().to_vec()));
                out.push(("head.output.bias".into(), output.bias.shape().to_vec()));
            }
        }
        out
    }

    /// All values concatenated in visiting order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.for_each_tensor(|_, t| out.extend_from_slice(t));
        out
    }

    pub fn num_values(&self) -> usize {
        let mut n = 0;
        self.for_each_tensor(|_, t| n += t.len());
        n
    }

    /// Overwrites all values from a flat slice in visiting order.
    pub fn assign_flat(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.num_values(), "flat length mismatch");
        let mut offset = 0;
        self.for_each_tensor_mut(|_, t| {
            t.copy_from_slice(&values[offset..offset + t.len()]);
            offset += t.len();
        });
    }
}

fn slice(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}

fn slice_mut(a: &mut Array2<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("standard layout")
}

/// First and second moment estimates plus the number of steps taken.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Params,
    pub v: Params,
    pub step: u64,
}

/// A probe: parameters, optimizer state and the shape information needed to
/// check inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeModel {
    pub params: Params,
    pub moments: AdamState,
    pub probe_type: ProbeType,
    pub input_dim: usize,
    pub loss: LossKind,
}

impl ProbeModel {
    /// Number of classifier outputs: one per label, or a single logit for
    /// binary cross-entropy.
    pub fn output_width(loss: LossKind, num_labels: usize) -> usize {
        match loss {
            LossKind::SoftmaxCe => num_labels,
            LossKind::Bce => 1,
        }
    }

    /// Randomly initialised probe. Draws happen in tensor visiting order.
    pub fn init<R: Rng>(
        config: &ProbeConfig,
        probe_type: ProbeType,
        input_dim: usize,
        num_labels: usize,
        rng: &mut R,
    ) -> Result<ProbeModel, ProbeError> {
        config.validate()?;
        if input_dim == 0 {
            return Err(ProbeError::Config("input dimension must be positive".into()));
        }
        if config.loss == LossKind::Bce && num_labels != 2 {
            return Err(ProbeError::Config(format!(
                "binary cross-entropy needs 2 labels, schema has {num_labels}"
            )));
        }
        if num_labels == 0 {
            return Err(ProbeError::Config("schema has no labels".into()));
        }
        let k = config.projection_dim;
        let projection = Affine::glorot(input_dim, k, rng);
        let n_scorers = if config.shared_attention { 1 } else { probe_type.span_slots() };
        let attention = (0..n_scorers)
            .map(|_| Affine::glorot(k, 1, rng).weight.row(0).to_owned())
            .collect();
        let features = k * probe_type.span_slots();
        let outputs = Self::output_width(config.loss, num_labels);
        let head = match config.head {
            HeadKind::Linear => Head::Linear(Affine::glorot(features, outputs, rng)),
            HeadKind::Mlp => Head::Mlp {
                hidden: Affine::glorot(features, config.hidden_dim, rng),
                output: Affine::glorot(config.hidden_dim, outputs, rng),
            },
        };
        let params = Params {
            projection,
            attention,
            head,
        };
        Ok(ProbeModel::from_params(params, probe_type, config.loss))
    }

    /// Wraps given parameters with fresh optimizer state.
    pub fn from_params(params: Params, probe_type: ProbeType, loss: LossKind) -> ProbeModel {
        let zeros = params.zeros_like();
        ProbeModel {
            input_dim: params.projection.n_in(),
            moments: AdamState {
                m: zeros.clone(),
                v: zeros,
                step: 0,
            },
            params,
            probe_type,
            loss,
        }
    }

    pub fn projection_dim(&self) -> usize {
        self.params.projection.n_out()
    }

    pub fn output_dim(&self) -> usize {
        match &self.params.head {
            Head::Linear(a) => a.n_out(),
            Head::Mlp { output, .. } => output.n_out(),
        }
    }

    /// Scorer used for span slot `slot` (0-based).
    pub fn scorer(&self, slot: usize) -> &Array1<f64> {
        &self.params.attention[slot.min(self.params.attention.len() - 1)]
    }

    pub(crate) fn scorer_index(&self, slot: usize) -> usize {
        slot.min(self.params.attention.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(head: HeadKind) -> ProbeConfig {
        ProbeConfig {
            head,
            projection_dim: 3,
            hidden_dim: 5,
            ..ProbeConfig::default()
        }
    }

    #[test]
    fn feature_width_follows_arity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let edge = ProbeModel::init(&config(HeadKind::Linear), ProbeType::Edge, 4, 7, &mut rng).unwrap();
        match &edge.params.head {
            Head::Linear(a) => assert_eq!((a.n_in(), a.n_out()), (6, 7)),
            _ => unreachable!(),
        }
        assert_eq!(edge.params.attention.len(), 2);
        let vertex = ProbeModel::init(&config(HeadKind::Mlp), ProbeType::Vertex, 4, 3, &mut rng).unwrap();
        match &vertex.params.head {
            Head::Mlp { hidden, output } => {
                assert_eq!((hidden.n_in(), hidden.n_out()), (3, 5));
                assert_eq!((output.n_in(), output.n_out()), (5, 3));
            }
            _ => unreachable!(),
        }
        assert_eq!(vertex.params.attention.len(), 1);
    }

    #[test]
    fn shared_attention_uses_one_scorer() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = ProbeConfig { shared_attention: true, ..config(HeadKind::Linear) };
        let m = ProbeModel::init(&c, ProbeType::Edge, 4, 2, &mut rng).unwrap();
        assert_eq!(m.params.attention.len(), 1);
        assert_eq!(m.scorer(0), m.scorer(1));
    }

    #[test]
    fn init_is_glorot_bounded_and_seeded() {
        let c = config(HeadKind::Linear);
        let a = ProbeModel::init(&c, ProbeType::Edge, 4, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = ProbeModel::init(&c, ProbeType::Edge, 4, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        let limit = (6.0f64 / 7.0).sqrt();
        assert!(a.params.projection.weight.iter().all(|w| w.abs() <= limit));
        assert!(a.params.projection.bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn flat_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = ProbeModel::init(&config(HeadKind::Mlp), ProbeType::Edge, 2, 3, &mut rng).unwrap();
        let flat = m.params.flatten();
        let mut z = m.params.zeros_like();
        z.assign_flat(&flat);
        assert_eq!(z, m.params);
        assert_eq!(m.params.shapes().len(), 8);
    }

    #[test]
    fn bce_requires_binary_schema() {
        let c = ProbeConfig { loss: LossKind::Bce, ..config(HeadKind::Linear) };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(ProbeModel::init(&c, ProbeType::Vertex, 2, 3, &mut rng).is_err());
        let m = ProbeModel::init(&c, ProbeType::Vertex, 2, 2, &mut rng).unwrap();
        assert_eq!(m.output_dim(), 1);
    }
}
