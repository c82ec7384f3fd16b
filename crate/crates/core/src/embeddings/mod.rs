//! Per-token vectors for probing examples.
//!
//! Three provider kinds sit behind [`EmbeddingProvider`]:
//!
//! * [`RandomProvider`]: a vector per token *type*, drawn from a seeded hash
//!   of the token string. It carries no contextual information at all.
//! * [`StaticVectors`]: uncontextualized word vectors from glove-text or
//!   word2vec-text files.
//! * [`ContextualEmbeddings`]: precomputed contextual vectors keyed by
//!   example id, in the line-delimited JSON format written by the exporter.
//!
//! Providers are immutable after loading and pure functions of their
//! configuration and the example, so repeated calls are bit-identical.

use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::ProbingExample;

mod cache;
mod contextual;
mod random;
mod static_vectors;

pub use contextual::{
    read_contextual, read_contextual_file, read_contextual_records, write_contextual,
    ContextualEmbeddings,
    ContextualRecord,
};
pub use random::RandomProvider;
pub use static_vectors::{load_static, read_static, OovPolicy, StaticFormat, StaticVectors};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("bad header: {0}")]
    Header(String),
    #[error("header declares {declared} vectors but the file has {found}")]
    HeaderMismatch { declared: usize, found: usize },
    #[error("duplicate example id {0:?}")]
    DuplicateId(String),
    #[error("no embeddings for example id {0:?}")]
    MissingId(String),
    #[error("example {id:?}: {found} embedding rows for {expected} tokens")]
    RowCount {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("non-finite embedding value")]
    NonFinite,
    #[error("empty embedding source: {0}")]
    Empty(String),
}

/// Row-per-token matrix of finite 32-bit values.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    vectors: Array2<f32>,
}

impl EmbeddingMatrix {
    pub fn new(vectors: Array2<f32>) -> Result<EmbeddingMatrix, EmbeddingError> {
        if vectors.ncols() == 0 {
            return Err(EmbeddingError::DimMismatch {
                expected: 1,
                found: 0,
            });
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite);
        }
        Ok(EmbeddingMatrix { vectors })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<EmbeddingMatrix, EmbeddingError> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(EmbeddingError::DimMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let flat: Vec<f32> = rows.iter().flatten().copied().collect();
        let vectors = Array2::from_shape_vec((rows.len(), dim), flat).expect("shape checked");
        EmbeddingMatrix::new(vectors)
    }

    pub fn n_tokens(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f32> {
        self.vectors.row(i)
    }

    pub fn as_array(&self) -> &Array2<f32> {
        &self.vectors
    }

    pub fn into_array(self) -> Array2<f32> {
        self.vectors
    }
}

/// Source of per-token vectors.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;

    /// One row per token of `example`.
    fn encode(&self, example: &ProbingExample) -> Result<EmbeddingMatrix, EmbeddingError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn encode(&self, example: &ProbingExample) -> Result<EmbeddingMatrix, EmbeddingError> {
        (**self).encode(example)
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn encode(&self, example: &ProbingExample) -> Result<EmbeddingMatrix, EmbeddingError> {
        (**self).encode(example)
    }
}

/// Declarative description of a provider, as found in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProviderSpec {
    Random {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Static {
        path: PathBuf,
        format: StaticFormat,
        #[serde(default)]
        oov_policy: OovPolicy,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Contextual {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

impl ProviderSpec {
    /// Files the spec refers to.
    pub fn path(&self) -> Option<&Path> {
        match self {
            ProviderSpec::Random { .. } => None,
            ProviderSpec::Static { path, .. } | ProviderSpec::Contextual { path, .. } => Some(path),
        }
    }

    /// Builds the provider. `default_seed` is used where the spec leaves the
    /// seed open; `cache_dir` enables the on-disk static-vector cache.
    pub fn load(
        &self,
        default_seed: u64,
        cache_dir: Option<&Path>,
    ) -> Result<Box<dyn EmbeddingProvider>, EmbeddingError> {
        match self {
            ProviderSpec::Random { dim, seed } => {
                if *dim == 0 {
                    return Err(EmbeddingError::DimMismatch {
                        expected: 1,
                        found: 0,
                    });
                }
                Ok(Box::new(RandomProvider::new(*dim, seed.unwrap_or(default_seed))))
            }
            ProviderSpec::Static {
                path,
                format,
                oov_policy,
                seed,
            } => {
                let vectors = match cache_dir {
                    Some(dir) => cache::load_static_cached(path, *format, dir)?,
                    None => load_static(path, *format)?,
                };
                Ok(Box::new(vectors.with_oov(*oov_policy, seed.unwrap_or(default_seed))))
            }
            ProviderSpec::Contextual { path, dim } => {
                let provider = read_contextual(path)?;
                if let Some(dim) = dim {
                    if *dim != provider.dim() {
                        return Err(EmbeddingError::DimMismatch {
                            expected: *dim,
                            found: provider.dim(),
                        });
                    }
                }
                Ok(Box::new(provider))
            }
        }
    }
}
