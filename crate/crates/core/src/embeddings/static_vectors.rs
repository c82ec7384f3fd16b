use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingMatrix, EmbeddingProvider, RandomProvider};
use crate::data::ProbingExample;

/// Text formats for uncontextualized word vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StaticFormat {
    /// `token v1 v2 ... vd` per line.
    GloveText,
    /// A `count dim` header line followed by glove-text rows.
    Word2vecText,
}

/// What out-of-vocabulary tokens receive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OovPolicy {
    Zero,
    #[default]
    HashedRandom,
}

/// Vocabulary plus a dense row-major vector table.
#[derive(Clone, Debug)]
pub struct StaticVectors {
    vocab: HashMap<String, usize>,
    words: Vec<String>,
    table: Vec<f32>,
    dim: usize,
    oov: OovPolicy,
    oov_vectors: RandomProvider,
}

impl StaticVectors {
    pub(crate) fn from_parts(words: Vec<String>, table: Vec<f32>, dim: usize) -> StaticVectors {
        debug_assert_eq!(words.len() * dim, table.len());
        let vocab = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        StaticVectors {
            vocab,
            words,
            table,
            dim,
            oov: OovPolicy::default(),
            oov_vectors: RandomProvider::new(dim, 0),
        }
    }

    pub fn with_oov(mut self, policy: OovPolicy, seed: u64) -> StaticVectors {
        self.oov = policy;
        self.oov_vectors = RandomProvider::new(self.dim, seed);
        self
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    /// Vocabulary in file order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub(crate) fn table(&self) -> &[f32] {
        &self.table
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vocab
            .get(token)
            .map(|&i| &self.table[i * self.dim..(i + 1) * self.dim])
    }
}

impl EmbeddingProvider for StaticVectors {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, example: &ProbingExample) -> Result<EmbeddingMatrix, EmbeddingError> {
        let mut vectors = Array2::zeros((example.tokens.len(), self.dim));
        for (mut row, token) in vectors.rows_mut().into_iter().zip(&example.tokens) {
            let row = row.as_slice_mut().expect("standard layout");
            match (self.get(token), self.oov) {
                (Some(v), _) => row.copy_from_slice(v),
                (None, OovPolicy::Zero) => {}
                (None, OovPolicy::HashedRandom) => self.oov_vectors.fill_row(token, row),
            }
        }
        EmbeddingMatrix::new(vectors)
    }
}

/// Reads word vectors from a text stream. Duplicate tokens keep their first
/// vector (a warning is logged).
pub fn read_static<R: BufRead>(reader: R, format: StaticFormat) -> Result<StaticVectors, EmbeddingError> {
    let mut lines = reader.lines().enumerate();
    let mut declared = None;
    let mut dim = None;

    if format == StaticFormat::Word2vecText {
        let (_, header) = lines
            .next()
            .ok_or_else(|| EmbeddingError::Header("missing header line".into()))?;
        let header = header.map_err(|e| EmbeddingError::Header(e.to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| EmbeddingError::Header(format!("{header:?} is not `count dim`")))
        };
        if fields.len() != 2 {
            return Err(EmbeddingError::Header(format!("{header:?} is not `count dim`")));
        }
        declared = Some(parse(fields[0])?);
        let d = parse(fields[1])?;
        if d == 0 {
            return Err(EmbeddingError::Header("dimension 0".into()));
        }
        dim = Some(d);
    }

    let mut words = Vec::new();
    let mut table = Vec::new();
    let mut seen = HashMap::new();
    let mut rows = 0usize;
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| EmbeddingError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-blank line has a field");
        let values = fields
            .map(|f| {
                f.parse::<f32>().map_err(|_| EmbeddingError::Parse {
                    line: line_no,
                    message: format!("{f:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f32>, _>>()?;
        let expected = *dim.get_or_insert(values.len());
        if values.len() != expected || expected == 0 {
            return Err(EmbeddingError::Ragged {
                line: line_no,
                expected,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite);
        }
        rows += 1;
        if let Some(first) = seen.get(token) {
            log::warn!("line {line_no}: duplicate token {token:?} (first on line {first}), keeping first");
            continue;
        }
        seen.insert(token.to_string(), line_no);
        words.push(token.to_string());
        table.extend(values);
    }

    if let Some(declared) = declared {
        if declared != rows {
            return Err(EmbeddingError::HeaderMismatch {
                declared,
                found: rows,
            });
        }
    }
    let dim = match dim {
        Some(d) if !words.is_empty() => d,
        _ => return Err(EmbeddingError::Empty("no vectors".into())),
    };
    Ok(StaticVectors::from_parts(words, table, dim))
}

pub fn load_static(path: impl AsRef<Path>, format: StaticFormat) -> Result<StaticVectors, EmbeddingError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| EmbeddingError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_static(BufReader::new(file), format)
}
