use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use probekit::analysis::ControlSpec;
use probekit::embeddings::ProviderSpec;
use probekit::probe::{HeadKind, ProbeConfig};
use serde::{Deserialize, Serialize};

/// A probing run: one task, a grid of providers × heads.
///
/// ```json
/// {
///   "schema": "SA-AP",
///   "train": "train.jsonl",
///   "test": "test.jsonl",
///   "providers": {
///     "bert": {"kind": "contextual", "path": "bert.jsonl.gz"},
///     "random": {"kind": "random", "dim": 768}
///   },
///   "heads": ["linear", "mlp"],
///   "probe": {"epochs": 10},
///   "control": {"seed": 1},
///   "baselines": ["random"],
///   "output_dir": "out",
///   "seed": 0
/// }
/// ```
///
/// Relative paths are resolved against the config file's directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in task name or schema file.
    pub schema: String,
    pub train: PathBuf,
    pub test: PathBuf,
    pub providers: BTreeMap<String, ProviderSpec>,
    #[serde(default = "default_heads")]
    pub heads: Vec<HeadKind>,
    /// Probe hyperparameters. `head` and `seed` here are ignored; the grid
    /// and the run seed set them.
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub control: Option<ControlSpec>,
    /// Providers treated as baselines for information gain.
    #[serde(default)]
    pub baselines: Vec<String>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_heads() -> Vec<HeadKind> {
    vec![HeadKind::Linear]
}

fn default_output() -> PathBuf {
    PathBuf::from("probekit-out")
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.train = resolve(base, &cfg.train);
        cfg.test = resolve(base, &cfg.test);
        cfg.output_dir = resolve(base, &cfg.output_dir);
        if Path::new(&cfg.schema).extension().is_some() {
            cfg.schema = resolve(base, Path::new(&cfg.schema)).display().to_string();
        }
        for spec in cfg.providers.values_mut() {
            match spec {
                ProviderSpec::Random { .. } => {}
                ProviderSpec::Static { path, .. } | ProviderSpec::Contextual { path, .. } => {
                    *path = resolve(base, path);
                }
            }
        }
        Ok(cfg)
    }

    /// Everything that can be checked without reading data.
    pub fn check(&self) -> anyhow::Result<()> {
        for (what, p) in [("train", &self.train), ("test", &self.test)] {
            if !p.is_file() {
                bail!("{what} dataset {} does not exist", p.display());
            }
        }
        if self.providers.is_empty() {
            bail!("no providers configured");
        }
        for (name, spec) in &self.providers {
            if name.is_empty() || name.contains(['/', '\\']) {
                bail!("provider name {name:?} must be non-empty and contain no path separators");
            }
            if let Some(p) = spec.path() {
                if !p.is_file() {
                    bail!("provider {name}: {} does not exist", p.display());
                }
            }
        }
        if self.heads.is_empty() {
            bail!("no heads configured");
        }
        let mut heads = self.heads.clone();
        heads.sort_by_key(|h| *h as u8);
        heads.dedup();
        if heads.len() != self.heads.len() {
            bail!("heads are listed twice");
        }
        for b in &self.baselines {
            if !self.providers.contains_key(b) {
                bail!("baseline {b:?} is not a configured provider");
            }
        }
        self.probe.validate().map_err(|e| anyhow!(e))?;
        Ok(())
    }

    /// Grid entries in run-index order: providers by name, then heads as
    /// listed.
    pub fn grid(&self) -> Vec<(String, HeadKind)> {
        self.providers
            .keys()
            .flat_map(|p| self.heads.iter().map(move |h| (p.clone(), *h)))
            .collect()
    }
}
