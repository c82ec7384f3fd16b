use serde::{Deserialize, Serialize};

use crate::data::{label_histogram, Dataset, ProbingExample, SpanTarget};
use crate::hash::{seeded_hash, unit_interval};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlSampling {
    Uniform,
    #[default]
    EmpiricalMarginal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: ControlSampling,
}

/// A fitted control task: a label distribution and a seed. The control label
/// of a target depends only on its type key and the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlTask {
    seed: u64,
    labels: Vec<String>,
    cdf: Vec<f64>,
}

/// Surface strings identifying a target's type: the span1 string for vertex
/// targets, the ordered (span1, span2) strings for edge targets.
pub fn type_key(example: &ProbingExample, target: &SpanTarget) -> Vec<String> {
    target.spans().map(|s| example.surface(s)).collect()
}

impl ControlTask {
    /// Fits the sampling distribution on `source` (normally the training
    /// split). Labels absent from `source` get no mass under the empirical
    /// marginal.
    pub fn fit(source: &Dataset, spec: &ControlSpec) -> ControlTask {
        let labels = source.schema.labels.clone();
        let hist = label_histogram(source);
        let weights: Vec<f64> = match spec.sampling {
            ControlSampling::Uniform => vec![1.0; labels.len()],
            ControlSampling::EmpiricalMarginal if hist.is_empty() => vec![1.0; labels.len()],
            ControlSampling::EmpiricalMarginal => labels
                .iter()
                .map(|l| hist.get(l).copied().unwrap_or(0) as f64)
                .collect(),
        };
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        ControlTask { seed: spec.seed, labels, cdf }
    }

    /// Probability of each schema label under the fitted distribution.
    pub fn distribution(&self) -> Vec<(String, f64)> {
        let mut prev = 0.0;
        self.labels
            .iter()
            .zip(&self.cdf)
            .map(|(l, &c)| {
                let p = c - prev;
                prev = c;
                (l.clone(), p)
            })
            .collect()
    }

    pub fn label_for(&self, key: &[String]) -> &str {
        let parts: Vec<&str> = key.iter().map(String::as_str).collect();
        let u = unit_interval(seeded_hash(self.seed, "control", &parts));
        // rounding can leave the last cumulative value just under 1
        let i = self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1);
        &self.labels[i]
    }

    /// Copy of `d` with every label replaced by its control label.
    pub fn apply(&self, d: &Dataset) -> Dataset {
        let mut out = d.clone();
        for ex in &mut out.examples {
            let keys: Vec<Vec<String>> = ex.targets.iter().map(|t| type_key(ex, t)).collect();
            for (t, key) in ex.targets.iter_mut().zip(keys) {
                t.label = self.label_for(&key).to_string();
            }
        }
        out
    }
}

/// Control version of `d`, with the distribution fitted on `d` itself.
///
/// ```
/// use probekit::analysis::{make_control, ControlSpec};
/// use probekit::data::*;
/// let ex = |id: &str, label: &str| ProbingExample {
///     id: id.into(),
///     tokens: vec!["a".into(), "tall".into(), "boy".into()],
///     targets: vec![SpanTarget::vertex(Span::new(2, 3), label)],
/// };
/// let d = Dataset::new(
///     TaskSchema::builtin(TaskName::Monotonicity),
///     Split::Train,
///     vec![ex("1", "Monotone"), ex("2", "Antitone")],
/// );
/// let c = make_control(&d, &ControlSpec::default());
/// // same token type, same control label
/// assert_eq!(c.examples[0].targets[0].label, c.examples[1].targets[0].label);
/// ```
pub fn make_control(d: &Dataset, spec: &ControlSpec) -> Dataset {
    ControlTask::fit(d, spec).apply(d)
}
