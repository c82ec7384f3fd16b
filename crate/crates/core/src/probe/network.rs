use ndarray::{s, Array1, Array2, Axis};

use super::loss::loss_and_grad;
use super::{Head, Params, ProbeError, ProbeModel};
use crate::data::{ProbeType, Span, SpanTarget};
use crate::embeddings::EmbeddingMatrix;

/// One training or evaluation instance: a target over an encoded example and
/// its gold label index.
#[derive(Clone, Copy, Debug)]
pub struct Instance<'a> {
    pub embeddings: &'a EmbeddingMatrix,
    pub target: &'a SpanTarget,
    pub label: usize,
}

/// Intermediate values of one span slot.
struct SlotCache {
    x: Array2<f64>,
    p: Array2<f64>,
    alpha: Array1<f64>,
}

struct Cache {
    slots: Vec<SlotCache>,
    features: Array1<f64>,
    hidden: Option<Array1<f64>>,
    logits: Array1<f64>,
}

fn check_span(e: &EmbeddingMatrix, span: Span) -> Result<(), ProbeError> {
    if span.is_valid_for(e.n_tokens()) {
        Ok(())
    } else {
        Err(ProbeError::SpanOutOfBounds { span, n_tokens: e.n_tokens() })
    }
}

fn pool(model: &ProbeModel, e: &EmbeddingMatrix, span: Span, slot: usize) -> SlotCache {
    let x = e
        .as_array()
        .slice(s![span.start..span.end, ..])
        .mapv(f64::from);
    let proj = &model.params.projection;
    let p = x.dot(&proj.weight.t()) + &proj.bias;
    let scores = p.dot(model.scorer(slot));
    let max = scores.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exp = scores.mapv(|v| (v - max).exp());
    let alpha = &exp / exp.sum();
    SlotCache { x, p, alpha }
}

impl SlotCache {
    fn pooled(&self) -> Array1<f64> {
        self.alpha.dot(&self.p)
    }
}

/// Attention-pooled representation of `span` using the scorer of `slot`
/// (0 for the first span, 1 for the second).
///
/// Only rows inside the span are read.
pub fn span_pool(
    model: &ProbeModel,
    e: &EmbeddingMatrix,
    span: Span,
    slot: usize,
) -> Result<Array1<f64>, ProbeError> {
    check_input(model, e)?;
    check_span(e, span)?;
    if slot >= model.probe_type.span_slots() {
        return Err(ProbeError::Arity(format!("slot {slot} on a {:?} probe", model.probe_type)));
    }
    Ok(pool(model, e, span, slot).pooled())
}

fn check_input(model: &ProbeModel, e: &EmbeddingMatrix) -> Result<(), ProbeError> {
    if e.dim() != model.input_dim {
        return Err(ProbeError::DimMismatch { expected: model.input_dim, found: e.dim() });
    }
    Ok(())
}

fn target_spans(model: &ProbeModel, target: &SpanTarget) -> Result<Vec<Span>, ProbeError> {
    match (model.probe_type, target.span2) {
        (ProbeType::Edge, Some(s2)) => Ok(vec![target.span1, s2]),
        (ProbeType::Vertex, None) => Ok(vec![target.span1]),
        (ProbeType::Edge, None) => Err(ProbeError::Arity("edge target without span2".into())),
        (ProbeType::Vertex, Some(_)) => Err(ProbeError::Arity("vertex target with span2".into())),
    }
}

fn run(model: &ProbeModel, e: &EmbeddingMatrix, target: &SpanTarget) -> Result<Cache, ProbeError> {
    check_input(model, e)?;
    let spans = target_spans(model, target)?;
    for &span in &spans {
        check_span(e, span)?;
    }
    let slots: Vec<SlotCache> = spans
        .iter()
        .enumerate()
        .map(|(slot, &span)| pool(model, e, span, slot))
        .collect();
    let mut features = Vec::with_capacity(model.projection_dim() * slots.len());
    for slot in &slots {
        features.extend(slot.pooled());
    }
    let features = Array1::from(features);
    let (hidden, logits) = match &model.params.head {
        Head::Linear(a) => (None, a.apply(features.view())),
        Head::Mlp { hidden, output } => {
            let g = hidden.apply(features.view()).mapv(f64::tanh);
            let z = output.apply(g.view());
            (Some(g), z)
        }
    };
    Ok(Cache { slots, features, hidden, logits })
}

/// Output logits for one target. Softmax models produce one logit per label,
/// binary cross-entropy models a single logit.
pub fn forward(
    model: &ProbeModel,
    e: &EmbeddingMatrix,
    target: &SpanTarget,
) -> Result<Array1<f64>, ProbeError> {
    Ok(run(model, e, target)?.logits)
}

/// Adds the gradient of one instance's loss to `grads`; returns the loss.
fn accumulate(
    model: &ProbeModel,
    inst: &Instance<'_>,
    grads: &mut Params,
) -> Result<f64, ProbeError> {
    let cache = run(model, inst.embeddings, inst.target)?;
    let (l, dz) = loss_and_grad(cache.logits.as_slice().expect("contiguous"), inst.label, model.loss)?;

    let outer = |a: &Array1<f64>, b: &Array1<f64>| {
        a.view().insert_axis(Axis(1)).dot(&b.view().insert_axis(Axis(0)))
    };
    let df = match (&model.params.head, &mut grads.head) {
        (Head::Linear(a), Head::Linear(ga)) => {
            ga.weight += &outer(&dz, &cache.features);
            ga.bias += &dz;
            a.weight.t().dot(&dz)
        }
        (Head::Mlp { hidden, output }, Head::Mlp { hidden: gh, output: go }) => {
            let g = cache.hidden.as_ref().expect("mlp caches hidden");
            go.weight += &outer(&dz, g);
            go.bias += &dz;
            let dg = output.weight.t().dot(&dz);
            let du = dg * &g.mapv(|v| 1.0 - v * v);
            gh.weight += &outer(&du, &cache.features);
            gh.bias += &du;
            hidden.weight.t().dot(&du)
        }
        _ => unreachable!("gradient buffer has the model's layout"),
    };

    let k = model.projection_dim();
    for (slot, sc) in cache.slots.iter().enumerate() {
        let dh = df.slice(s![slot * k..(slot + 1) * k]);
        let w = model.scorer(slot);
        let d_alpha = sc.p.dot(&dh);
        let mean = sc.alpha.dot(&d_alpha);
        let da = &sc.alpha * &(d_alpha - mean);
        grads.attention[model.scorer_index(slot)] += &da.dot(&sc.p);
        let dp = outer(&sc.alpha, &dh.to_owned()) + outer(&da, w);
        grads.projection.weight += &dp.t().dot(&sc.x);
        grads.projection.bias += &dp.sum_axis(Axis(0));
    }
    Ok(l)
}

/// Mean gradient and mean loss over a batch.
pub fn backward(model: &ProbeModel, batch: &[Instance<'_>]) -> Result<(Params, f64), ProbeError> {
    let mut grads = model.params.zeros_like();
    if batch.is_empty() {
        return Ok((grads, 0.0));
    }
    let mut total = 0.0;
    for inst in batch {
        total += accumulate(model, inst, &mut grads)?;
    }
    let n = batch.len() as f64;
    grads.for_each_tensor_mut(|_, t| t.iter_mut().for_each(|v| *v /= n));
    Ok((grads, total / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::{Affine, LossKind};
    use ndarray::array;

    fn identity_model(probe_type: ProbeType, head: Affine) -> ProbeModel {
        let params = Params {
            projection: Affine {
                weight: Array2::eye(2),
                bias: Array1::zeros(2),
            },
            attention: vec![array![0.0, 3f64.ln()]; probe_type.span_slots()],
            head: Head::Linear(head),
        };
        ProbeModel::from_params(params, probe_type, LossKind::SoftmaxCe)
    }

    fn emb(rows: &[[f32; 2]]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn pooling_weights_follow_softmax() {
        let m = identity_model(ProbeType::Vertex, Affine::zeros(2, 2));
        let e = emb(&[[1.0, 0.0], [0.0, 1.0]]);
        let pooled = span_pool(&m, &e, Span::new(0, 2), 0).unwrap();
        assert!((pooled[0] - 0.25).abs() < 1e-12);
        assert!((pooled[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn single_token_span_is_projection() {
        let mut m = identity_model(ProbeType::Vertex, Affine::zeros(2, 2));
        m.params.projection.weight = array![[2.0, -1.0], [0.5, 3.0]];
        m.params.projection.bias = array![0.1, 0.2];
        let e = emb(&[[1.0, 2.0], [7.0, 7.0]]);
        let pooled = span_pool(&m, &e, Span::new(0, 1), 0).unwrap();
        assert!((pooled[0] - 0.1).abs() < 1e-12);
        assert!((pooled[1] - 6.7).abs() < 1e-12);
    }

    #[test]
    fn zero_head_gives_zero_logits() {
        let m = identity_model(ProbeType::Edge, Affine::zeros(4, 3));
        let e = emb(&[[1.0, 5.0], [-2.0, 0.5], [3.0, 3.0]]);
        let t = SpanTarget::edge(Span::new(0, 2), Span::new(2, 3), "x");
        assert_eq!(forward(&m, &e, &t).unwrap(), Array1::<f64>::zeros(3));
    }

    #[test]
    fn arity_and_bounds_are_checked() {
        let m = identity_model(ProbeType::Vertex, Affine::zeros(2, 2));
        let e = emb(&[[1.0, 0.0]]);
        let edge = SpanTarget::edge(Span::new(0, 1), Span::new(0, 1), "x");
        assert!(matches!(forward(&m, &e, &edge), Err(ProbeError::Arity(_))));
        let far = SpanTarget::vertex(Span::new(1, 2), "x");
        assert!(matches!(forward(&m, &e, &far), Err(ProbeError::SpanOutOfBounds { .. })));
        let wide = EmbeddingMatrix::from_rows(&[vec![0.0; 3]]).unwrap();
        let ok = SpanTarget::vertex(Span::new(0, 1), "x");
        assert!(matches!(forward(&m, &wide, &ok), Err(ProbeError::DimMismatch { .. })));
    }

    #[test]
    fn empty_batch_has_zero_gradient() {
        let m = identity_model(ProbeType::Vertex, Affine::zeros(2, 2));
        let (g, l) = backward(&m, &[]).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }
}
