//! On-disk cache for parsed static vectors.
//!
//! Text vector files are slow to parse. When a cache directory is configured
//! the parsed table is stored in a small binary file named after a hash of
//! the source path, size, modification time and format:
//!
//! ```text
//! magic "PKSV1\0" | dim u32 | count u32 | count × (len u32, utf-8 token, dim × f32)
//! ```
//!
//! All integers and floats are little-endian.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::UNIX_EPOCH;

use sha2::{Digest, Sha256};

use super::{load_static, EmbeddingError, EmbeddingProvider, StaticFormat, StaticVectors};

const MAGIC: &[u8; 6] = b"PKSV1\0";

fn cache_path(source: &Path, format: StaticFormat, dir: &Path) -> io::Result<PathBuf> {
    let meta = fs::metadata(source)?;
    let mtime = meta
        .modified()
        .ok()
        .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
        .map_or(0, |d| d.as_nanos());
    let canonical = fs::canonicalize(source)?;
    let mut h = Sha256::new();
    h.update(canonical.to_string_lossy().as_bytes());
    h.update(meta.len().to_le_bytes());
    h.update(mtime.to_le_bytes());
    h.update(format!("{format:?}").as_bytes());
    let digest = h.finalize();
    let key: String = digest[..12].iter().map(|b| format!("{b:02x}")).collect();
    Ok(dir.join(format!("static-{key}.bin")))
}

pub(crate) fn load_static_cached(
    source: &Path,
    format: StaticFormat,
    dir: &Path,
) -> Result<StaticVectors, EmbeddingError> {
    let io_err = |e| EmbeddingError::Io {
        path: source.display().to_string(),
        source: e,
    };
    let path = cache_path(source, format, dir).map_err(io_err)?;
    if let Ok(bytes) = fs::read(&path) {
        match decode(&bytes) {
            Ok(v) => return Ok(v),
            Err(e) => log::warn!("ignoring unreadable cache {}: {e}", path.display()),
        }
    }
    let vectors = load_static(source, format)?;
    if let Err(e) = store(&path, &vectors) {
        log::warn!("could not write cache {}: {e}", path.display());
    }
    Ok(vectors)
}

fn store(path: &Path, vectors: &StaticVectors) -> io::Result<()> {
    let dir = path.parent().expect("cache path has a parent");
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    let mut out = io::BufWriter::new(fs::File::create(&tmp)?);
    out.write_all(MAGIC)?;
    out.write_all(&(vectors.dim() as u32).to_le_bytes())?;
    out.write_all(&(vectors.vocab_size() as u32).to_le_bytes())?;
    for (word, row) in vectors.words().iter().zip(vectors.table().chunks(vectors.dim())) {
        out.write_all(&(word.len() as u32).to_le_bytes())?;
        out.write_all(word.as_bytes())?;
        for v in row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    drop(out);
    fs::rename(tmp, path)
}

fn decode(mut bytes: &[u8]) -> io::Result<StaticVectors> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut magic = [0u8; 6];
    bytes.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut u32_buf = [0u8; 4];
    let mut read_u32 = |b: &mut &[u8]| -> io::Result<usize> {
        b.read_exact(&mut u32_buf)?;
        Ok(u32::from_le_bytes(u32_buf) as usize)
    };
    let dim = read_u32(&mut bytes)?;
    let count = read_u32(&mut bytes)?;
    if dim == 0 || count == 0 {
        return Err(bad("empty table"));
    }
    let mut words = Vec::with_capacity(count);
    let mut table = Vec::with_capacity(count * dim);
    for _ in 0..count {
        let len = read_u32(&mut bytes)?;
        let mut word = vec![0u8; len];
        bytes.read_exact(&mut word)?;
        words.push(String::from_utf8(word).map_err(|_| bad("token is not utf-8"))?);
        for _ in 0..dim {
            let mut f = [0u8; 4];
            bytes.read_exact(&mut f)?;
            table.push(f32::from_le_bytes(f));
        }
    }
    if !bytes.is_empty() {
        return Err(bad("trailing bytes"));
    }
    Ok(StaticVectors::from_parts(words, table, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::EmbeddingProvider;

    #[test]
    fn cache_hit_matches_source() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("vecs.txt");
        fs::write(&src, "the 0.1 0.2\ncafé -3 4e-5\n").unwrap();
        let cache = dir.path().join("cache");

        let first = load_static_cached(&src, StaticFormat::GloveText, &cache).unwrap();
        assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
        let second = load_static_cached(&src, StaticFormat::GloveText, &cache).unwrap();
        assert_eq!(first.words(), second.words());
        assert_eq!(first.table(), second.table());
        assert_eq!(second.get("café").unwrap(), &[-3.0, 4e-5]);
        assert_eq!(second.dim(), 2);
    }

    #[test]
    fn corrupt_cache_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("vecs.txt");
        fs::write(&src, "a 1 2\n").unwrap();
        let cache = dir.path().join("cache");
        let path = cache_path(&src, StaticFormat::GloveText, &cache).unwrap();
        fs::create_dir_all(&cache).unwrap();
        fs::write(&path, b"garbage").unwrap();
        let v = load_static_cached(&src, StaticFormat::GloveText, &cache).unwrap();
        assert_eq!(v.get("a").unwrap(), &[1.0, 2.0]);
        assert!(decode(&fs::read(&path).unwrap()).is_ok());
    }
}
