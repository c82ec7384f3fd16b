use super::{AdamConfig, Params, ProbeModel};

/// One Adam update of `params` in place. `t` is the 1-based step number used
/// for bias correction.
///
/// ```
/// use probekit::probe::{adam_update, AdamConfig};
/// let (mut theta, mut m, mut v) = ([1.0], [0.0], [0.0]);
/// adam_update(&mut theta, &[1.0], &mut m, &mut v, 1, 1e-4, &AdamConfig::default());
/// assert!((theta[0] - (1.0 - 1e-4 / (1.0 + 1e-8))).abs() < 1e-15);
/// ```
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    lr: f64,
    cfg: &AdamConfig,
) {
    assert!(t >= 1, "adam step numbers start at 1");
    assert!(params.len() == grads.len() && m.len() == grads.len() && v.len() == grads.len());
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

impl ProbeModel {
    /// Applies one optimizer step with the given gradients.
    pub fn adam_step(&mut self, grads: &Params, lr: f64, cfg: &AdamConfig) {
        self.moments.step += 1;
        let t = self.moments.step;
        let mut g = Vec::new();
        grads.for_each_tensor(|_, x| g.push(x.to_vec()));
        let mut m = Vec::new();
        self.moments.m.for_each_tensor(|_, x| m.push(x.to_vec()));
        let mut v = Vec::new();
        self.moments.v.for_each_tensor(|_, x| v.push(x.to_vec()));
        let mut i = 0;
        self.params.for_each_tensor_mut(|_, p| {
            adam_update(p, &g[i], &mut m[i], &mut v[i], t, lr, cfg);
            i += 1;
        });
        let mut i = 0;
        self.moments.m.for_each_tensor_mut(|_, x| {
            x.copy_from_slice(&m[i]);
            i += 1;
        });
        let mut i = 0;
        self.moments.v.for_each_tensor_mut(|_, x| {
            x.copy_from_slice(&v[i]);
            i += 1;
        });
    }
}
