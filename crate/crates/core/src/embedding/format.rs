//! On-disk embedding formats.
//!
//! CEMB layout, all integers little-endian:
//!
//! ```text
//! "CEMB"            4 bytes
//! version: u16      = 1
//! n: u64
//! d: u32
//! n × (len: u16, UTF-8 id bytes)
//! n·d × f32
//! ```
//!
//! The CSV fallback has a header `id,f0,...,f{d-1}` and one row per image.

use std::io::Write;
use std::path::Path;

use super::{EmbeddingError, EmbeddingMatrix};
use crate::util::write_atomic;

pub const MAGIC: &[u8; 4] = b"CEMB";
pub const VERSION: u16 = 1;
/// Bytes before the first ID block.
pub const HEADER_LEN: usize = 4 + 2 + 8 + 4;

/// Tag given to matrices read back from disk; CEMB does not store one.
pub const LOADED_TAG: &str = "precomputed";

pub fn encode_cemb(m: &EmbeddingMatrix<f32>) -> Result<Vec<u8>, EmbeddingError> {
    let id_bytes: usize = m.ids().iter().map(|s| 2 + s.len()).sum();
    let mut buf = Vec::with_capacity(HEADER_LEN + id_bytes + m.values().len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(m.n() as u64).to_le_bytes());
    let d = u32::try_from(m.dim()).map_err(|_| EmbeddingError::Invalid("dimension exceeds u32".into()))?;
    buf.extend_from_slice(&d.to_le_bytes());
    for id in m.ids() {
        let len = u16::try_from(id.len())
            .map_err(|_| EmbeddingError::Invalid(format!("image id longer than 65535 bytes: {id:.32}…")))?;
        buf.extend_from_slice(&len.to_le_bytes());
        buf.extend_from_slice(id.as_bytes());
    }
    for v in m.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8], EmbeddingError> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            EmbeddingError::Truncated(format!(
                "{what}: need {len} bytes at offset {}, file has {}",
                self.pos,
                self.buf.len()
            ))
        })?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N], EmbeddingError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }
}

pub fn decode_cemb(bytes: &[u8]) -> Result<EmbeddingMatrix<f32>, EmbeddingError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(EmbeddingError::BadMagic);
    }
    r.pos = 4;
    let version = u16::from_le_bytes(r.array("version")?);
    if version != VERSION {
        return Err(EmbeddingError::UnsupportedVersion(version));
    }
    let n = u64::from_le_bytes(r.array("row count")?);
    let d = u32::from_le_bytes(r.array("dimension")?) as usize;
    if d == 0 {
        return Err(EmbeddingError::Invalid("dimension must be positive".into()));
    }
    let n = usize::try_from(n).map_err(|_| EmbeddingError::Invalid("row count overflows".into()))?;
    // smallest possible file for this header; rejects absurd counts before allocating
    let min_len = n
        .checked_mul(2 + d * 4)
        .and_then(|v| v.checked_add(HEADER_LEN))
        .ok_or_else(|| EmbeddingError::Invalid("header sizes overflow".into()))?;
    if bytes.len() < min_len {
        return Err(EmbeddingError::Truncated(format!(
            "header declares n={n}, d={d}; file has only {} bytes",
            bytes.len()
        )));
    }
    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        let len = u16::from_le_bytes(r.array("id length")?) as usize;
        let raw = r.take(len, "id bytes")?;
        let id = std::str::from_utf8(raw)
            .map_err(|_| EmbeddingError::Invalid(format!("id {i} is not valid UTF-8")))?;
        ids.push(id.to_string());
    }
    let payload = r.take(n * d * 4, "payload")?;
    if r.pos != bytes.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: n * d * 4,
            found: bytes.len() - (r.pos - n * d * 4),
        });
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
        .collect();
    EmbeddingMatrix::new(ids, d, values, LOADED_TAG)
}

pub fn encode_csv(m: &EmbeddingMatrix<f32>) -> Result<Vec<u8>, EmbeddingError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    header.extend((0..m.dim()).map(|j| format!("f{j}")));
    w.write_record(&header)?;
    for (id, row) in m.ids().iter().zip(m.rows()) {
        let mut rec = vec![id.clone()];
        // shortest repr that parses back to the same f32
        rec.extend(row.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| EmbeddingError::Io(e.into_error()))
}

pub fn decode_csv(bytes: &[u8]) -> Result<EmbeddingMatrix<f32>, EmbeddingError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("id") || header.len() < 2 {
        return Err(EmbeddingError::Invalid("CSV header must be id,f0,...".into()));
    }
    for (j, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{j}") {
            return Err(EmbeddingError::Invalid(format!("CSV column {} should be f{j}, found {name:?}", j + 1)));
        }
    }
    let d = header.len() - 1;
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != d + 1 {
            return Err(EmbeddingError::DimensionMismatch { expected: d + 1, found: rec.len() });
        }
        ids.push(rec[0].to_string());
        for field in rec.iter().skip(1) {
            let v: f32 = field.trim().parse().map_err(|_| {
                EmbeddingError::Invalid(format!("row {}: cannot parse {field:?}", line + 1))
            })?;
            values.push(v);
        }
    }
    EmbeddingMatrix::new(ids, d, values, LOADED_TAG)
}

/// Load a CEMB file, or a CSV file when the magic is absent.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix<f32>, EmbeddingError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        decode_cemb(&bytes)
    } else if bytes.len() >= 4 && bytes[..4].iter().any(|b| !b.is_ascii()) {
        Err(EmbeddingError::BadMagic)
    } else {
        decode_csv(&bytes)
    }
}

pub fn save_embeddings(m: &EmbeddingMatrix<f32>, path: &Path) -> Result<(), EmbeddingError> {
    let bytes = encode_cemb(m)?;
    write_atomic(path, |f| f.write_all(&bytes))?;
    Ok(())
}

pub fn save_embeddings_csv(m: &EmbeddingMatrix<f32>, path: &Path) -> Result<(), EmbeddingError> {
    let bytes = encode_csv(m)?;
    write_atomic(path, |f| f.write_all(&bytes))?;
    Ok(())
}
