use serde::{Deserialize, Serialize};

use super::ProbeError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    #[default]
    Linear,
    Mlp,
}

impl std::fmt::Display for HeadKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HeadKind::Linear => f.write_str("linear"),
            HeadKind::Mlp => f.write_str("mlp"),
        }
    }
}

/// Training objective. `Bce` uses a single sigmoid logit and is only valid
/// for two-label schemas; label index 1 is the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    #[default]
    SoftmaxCe,
    Bce,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Probe architecture and optimisation settings. Defaults: learning rate
/// 1e-4, batch size 4 (targets), 10 epochs, 256-wide projection and hidden
/// layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub head: HeadKind,
    pub projection_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub loss: LossKind,
    /// One attention scorer for both span slots instead of one per slot.
    pub shared_attention: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            head: HeadKind::Linear,
            projection_dim: 256,
            hidden_dim: 256,
            learning_rate: 1e-4,
            batch_size: 4,
            epochs: 10,
            seed: 0,
            adam: AdamConfig::default(),
            loss: LossKind::SoftmaxCe,
            shared_attention: false,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        let fail = |m: &str| Err(ProbeError::Config(m.to_string()));
        if self.projection_dim == 0 {
            return fail("projection_dim must be positive");
        }
        if self.head == HeadKind::Mlp && self.hidden_dim == 0 {
            return fail("hidden_dim must be positive");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        let AdamConfig { beta1, beta2, eps } = self.adam;
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || eps.is_nan() || eps <= 0.0 {
            return fail("adam betas must lie in [0, 1) and eps must be positive");
        }
        Ok(())
    }
}
