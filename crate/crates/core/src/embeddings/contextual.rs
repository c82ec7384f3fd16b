use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingMatrix, EmbeddingProvider};
use crate::data::ProbingExample;

/// One line of a contextual embedding file. Provenance fields written by the
/// exporter (model, layer, pooling) are kept but not interpreted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextualRecord {
    pub dim: usize,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooling: Option<String>,
    pub vectors: Vec<Vec<f32>>,
}

impl ContextualRecord {
    pub fn new(id: impl Into<String>, matrix: &EmbeddingMatrix) -> ContextualRecord {
        ContextualRecord {
            dim: matrix.dim(),
            id: id.into(),
            layer: None,
            model: None,
            pooling: None,
            vectors: matrix.as_array().rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

/// Precomputed contextual vectors keyed by example id.
#[derive(Clone, Debug)]
pub struct ContextualEmbeddings {
    by_id: HashMap<String, EmbeddingMatrix>,
    dim: usize,
}

impl ContextualEmbeddings {
    pub fn from_matrices(
        matrices: impl IntoIterator<Item = (String, EmbeddingMatrix)>,
    ) -> Result<ContextualEmbeddings, EmbeddingError> {
        let mut by_id = HashMap::new();
        let mut dim = None;
        for (id, m) in matrices {
            let expected = *dim.get_or_insert(m.dim());
            if m.dim() != expected {
                return Err(EmbeddingError::DimMismatch {
                    expected,
                    found: m.dim(),
                });
            }
            if by_id.insert(id.clone(), m).is_some() {
                return Err(EmbeddingError::DuplicateId(id));
            }
        }
        let dim = dim.ok_or_else(|| EmbeddingError::Empty("no records".into()))?;
        Ok(ContextualEmbeddings { by_id, dim })
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingMatrix> {
        self.by_id.get(id)
    }

    /// Token count recorded for an id.
    pub fn n_tokens(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).map(EmbeddingMatrix::n_tokens)
    }

    pub fn read<R: BufRead>(reader: R) -> Result<ContextualEmbeddings, EmbeddingError> {
        let records = read_contextual_records(reader)?;
        ContextualEmbeddings::from_matrices(
            records
                .iter()
                .map(|r| Ok((r.id.clone(), EmbeddingMatrix::try_from(r)?)))
                .collect::<Result<Vec<_>, EmbeddingError>>()?,
        )
    }
}

/// Reads and shape-checks records without building a provider.
pub fn read_contextual_records<R: BufRead>(reader: R) -> Result<Vec<ContextualRecord>, EmbeddingError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let parse_err = |message: String| EmbeddingError::Parse {
            line: line_no,
            message,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ContextualRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if record.vectors.is_empty() {
            return Err(parse_err(format!("record {:?} has no rows", record.id)));
        }
        if let Some(row) = record.vectors.iter().find(|r| r.len() != record.dim) {
            return Err(EmbeddingError::Ragged {
                line: line_no,
                expected: record.dim,
                found: row.len(),
            });
        }
        records.push(record);
    }
    Ok(records)
}

impl EmbeddingProvider for ContextualEmbeddings {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, example: &ProbingExample) -> Result<EmbeddingMatrix, EmbeddingError> {
        let m = self
            .by_id
            .get(&example.id)
            .ok_or_else(|| EmbeddingError::MissingId(example.id.clone()))?;
        if m.n_tokens() != example.tokens.len() {
            return Err(EmbeddingError::RowCount {
                id: example.id.clone(),
                expected: example.tokens.len(),
                found: m.n_tokens(),
            });
        }
        Ok(m.clone())
    }
}

/// Reads a contextual embedding file; gzip input is detected by its magic
/// bytes.
pub fn read_contextual(path: impl AsRef<Path>) -> Result<ContextualEmbeddings, EmbeddingError> {
    with_reader(path.as_ref(), ContextualEmbeddings::read)
}

fn with_reader<T>(
    path: &Path,
    read: impl Fn(Box<dyn BufRead>) -> Result<T, EmbeddingError>,
) -> Result<T, EmbeddingError> {
    let io_err = |e| EmbeddingError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut file = File::open(path).map_err(io_err)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(io_err)?;
    let file = File::open(path).map_err(io_err)?;
    if n == 2 && magic == [0x1f, 0x8b] {
        read(Box::new(BufReader::new(GzDecoder::new(file))))
    } else {
        read(Box::new(BufReader::new(file)))
    }
}

/// Writes records one per line; gzip-compressed when `gzip` is set.
pub fn write_contextual<'a>(
    path: impl AsRef<Path>,
    records: impl IntoIterator<Item = &'a ContextualRecord>,
    gzip: bool,
) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    let io_err = |e| EmbeddingError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let file = File::create(path).map_err(io_err)?;
    if gzip {
        let mut out = GzEncoder::new(BufWriter::new(file), Compression::default());
        write_lines(&mut out, records).map_err(io_err)?;
        out.finish().and_then(|mut w| w.flush()).map_err(io_err)
    } else {
        let mut out = BufWriter::new(file);
        write_lines(&mut out, records).map_err(io_err)?;
        out.flush().map_err(io_err)
    }
}

fn write_lines<'a, W: Write>(
    out: &mut W,
    records: impl IntoIterator<Item = &'a ContextualRecord>,
) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut *out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads the raw records of a (possibly gzipped) file.
pub fn read_contextual_file(path: impl AsRef<Path>) -> Result<Vec<ContextualRecord>, EmbeddingError> {
    with_reader(path.as_ref(), read_contextual_records)
}

/// Converts a record into a matrix without a provider round trip.
impl TryFrom<&ContextualRecord> for EmbeddingMatrix {
    type Error = EmbeddingError;

    fn try_from(record: &ContextualRecord) -> Result<Self, Self::Error> {
        let flat: Vec<f32> = record.vectors.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((record.vectors.len(), record.dim), flat).map_err(|_| {
            EmbeddingError::DimMismatch {
                expected: record.dim,
                found: record.vectors.first().map_or(0, Vec::len),
            }
        })?;
        EmbeddingMatrix::new(arr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(id: &str, n: usize) -> ProbingExample {
        ProbingExample {
            id: id.into(),
            tokens: (0..n).map(|i| format!("t{i}")).collect(),
            targets: vec![],
        }
    }

    fn record(id: &str, rows: usize, dim: usize) -> String {
        let vectors: Vec<Vec<f32>> = (0..rows)
            .map(|r| (0..dim).map(|c| (r * dim + c) as f32 * 0.5).collect())
            .collect();
        serde_json::to_string(&serde_json::json!({"id": id, "dim": dim, "vectors": vectors})).unwrap()
    }

    #[test]
    fn serves_matrix_for_id() {
        let p = ContextualEmbeddings::read(record("e1", 4, 8).as_bytes()).unwrap();
        let m = p.encode(&example("e1", 4)).unwrap();
        assert_eq!((m.n_tokens(), m.dim()), (4, 8));
        assert_eq!(p.n_tokens("e1"), Some(4));
        assert!(matches!(
            p.encode(&example("e9", 4)),
            Err(EmbeddingError::MissingId(id)) if id == "e9"
        ));
        assert!(matches!(
            p.encode(&example("e1", 5)),
            Err(EmbeddingError::RowCount { .. })
        ));
    }

    #[test]
    fn rejects_duplicates_and_shape_errors() {
        let dup = format!("{}\n{}\n", record("a", 1, 2), record("a", 1, 2));
        assert!(matches!(
            ContextualEmbeddings::read(dup.as_bytes()),
            Err(EmbeddingError::DuplicateId(_))
        ));
        let bad = r#"{"id":"a","dim":3,"vectors":[[1,2]]}"#;
        assert!(matches!(
            ContextualEmbeddings::read(bad.as_bytes()),
            Err(EmbeddingError::Ragged { .. })
        ));
        let mixed = format!("{}\n{}\n", record("a", 1, 2), record("b", 1, 3));
        assert!(matches!(
            ContextualEmbeddings::read(mixed.as_bytes()),
            Err(EmbeddingError::DimMismatch { .. })
        ));
    }

    #[test]
    fn provenance_fields_are_accepted() {
        let line = r#"{"id":"a","dim":1,"vectors":[[0.5]],"model":"bert-base-uncased","layer":-1,"pooling":"mean"}"#;
        let p = ContextualEmbeddings::read(line.as_bytes()).unwrap();
        assert_eq!(p.dim(), 1);
    }

    #[test]
    fn gzip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl.gz");
        let m = EmbeddingMatrix::from_rows(&[vec![0.1, -2.5e-7], vec![3.0, 1e30]]).unwrap();
        let rec = ContextualRecord::new("x", &m);
        write_contextual(&path, [&rec], true).unwrap();
        let p = read_contextual(&path).unwrap();
        assert_eq!(p.get("x").unwrap(), &m);
    }
}
