use ndarray::Array1;

use super::{LossKind, ProbeError};

fn check(logits: &[f64], label: usize, kind: LossKind) -> Result<(), ProbeError> {
    let n_outputs = match kind {
        LossKind::SoftmaxCe => logits.len(),
        LossKind::Bce => {
            if logits.len() != 1 {
                return Err(ProbeError::Config(format!(
                    "binary cross-entropy takes one logit, got {}",
                    logits.len()
                )));
            }
            2
        }
    };
    if label >= n_outputs {
        return Err(ProbeError::LabelOutOfRange { index: label, n_outputs });
    }
    Ok(())
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Loss in nats for one target.
///
/// ```
/// use probekit::probe::{loss, LossKind};
/// let l = loss(&[0.0, 0.0, 0.0], 1, LossKind::SoftmaxCe).unwrap();
/// assert!((l - 3f64.ln()).abs() < 1e-12);
/// ```
pub fn loss(logits: &[f64], label: usize, kind: LossKind) -> Result<f64, ProbeError> {
    check(logits, label, kind)?;
    Ok(match kind {
        LossKind::SoftmaxCe => (log_sum_exp(logits) - logits[label]).max(0.0),
        LossKind::Bce => softplus(logits[0]) - label as f64 * logits[0],
    })
}

/// Loss and its gradient with respect to the logits.
pub fn loss_and_grad(
    logits: &[f64],
    label: usize,
    kind: LossKind,
) -> Result<(f64, Array1<f64>), ProbeError> {
    let l = loss(logits, label, kind)?;
    let grad = match kind {
        LossKind::SoftmaxCe => {
            let lse = log_sum_exp(logits);
            let mut g: Array1<f64> = logits.iter().map(|z| (z - lse).exp()).collect();
            g[label] -= 1.0;
            g
        }
        LossKind::Bce => Array1::from_elem(1, sigmoid(logits[0]) - label as f64),
    };
    Ok((l, grad))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Predicted label index for one output vector.
pub(crate) fn decide(logits: &[f64], kind: LossKind) -> usize {
    match kind {
        LossKind::SoftmaxCe => argmax(logits),
        // sigma(z) = 0.5 is a tie between the two labels: lowest index wins
        LossKind::Bce => usize::from(logits[0] > 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_ce(z: &[f64], y: usize) -> f64 {
        let denom: f64 = z.iter().map(|v| v.exp()).sum();
        -(z[y].exp() / denom).ln()
    }

    #[test]
    fn uniform_logits_give_log_k() {
        for k in 1..6 {
            let z = vec![0.3; k];
            let l = loss(&z, k - 1, LossKind::SoftmaxCe).unwrap();
            assert!((l - (k as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn bce_at_half_is_ln2() {
        for y in [0, 1] {
            let l = loss(&[0.0], y, LossKind::Bce).unwrap();
            assert!((l - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn three_class_value() {
        let z = [2.0, 0.0, -1.0];
        let l = loss(&z, 0, LossKind::SoftmaxCe).unwrap();
        assert!((l - reference_ce(&z, 0)).abs() < 1e-12);
        assert!((l - 0.169846).abs() < 5e-6);
        // 0.2395 is the value for [2, 0, 0]
        let l = loss(&[2.0, 0.0, 0.0], 0, LossKind::SoftmaxCe).unwrap();
        assert!((l - 0.2395).abs() < 5e-5);
    }

    #[test]
    fn label_range_is_checked() {
        assert!(matches!(
            loss(&[1.0, 2.0], 2, LossKind::SoftmaxCe),
            Err(ProbeError::LabelOutOfRange { index: 2, n_outputs: 2 })
        ));
        assert!(loss(&[1.0], 2, LossKind::Bce).is_err());
        assert!(loss(&[1.0, 2.0], 0, LossKind::Bce).is_err());
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let l = loss(&[800.0, -800.0], 1, LossKind::SoftmaxCe).unwrap();
        assert!((l - 1600.0).abs() < 1e-9);
        assert_eq!(loss(&[800.0, -800.0], 0, LossKind::SoftmaxCe).unwrap(), 0.0);
        assert!((loss(&[-800.0], 1, LossKind::Bce).unwrap() - 800.0).abs() < 1e-9);
        let (_, g) = loss_and_grad(&[800.0], 0, LossKind::Bce).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_softmax_minus_onehot() {
        let z = [0.5, -1.0, 2.0];
        let (_, g) = loss_and_grad(&z, 2, LossKind::SoftmaxCe).unwrap();
        assert!(g.sum().abs() < 1e-12);
        let h = 1e-6;
        for i in 0..3 {
            let mut up = z;
            up[i] += h;
            let mut dn = z;
            dn[i] -= h;
            let fd = (reference_ce(&up, 2) - reference_ce(&dn, 2)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn ties_pick_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
        assert_eq!(decide(&[0.0], LossKind::Bce), 0);
        assert_eq!(decide(&[1e-9], LossKind::Bce), 1);
    }
}
