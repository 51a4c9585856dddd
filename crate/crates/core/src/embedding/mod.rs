//! Image feature vectors: the in-memory matrix, its file formats and the
//! extraction backends.

mod backend;
mod format;
mod matrix;
#[cfg(feature = "onnx")]
pub mod onnx;

pub use backend::{extract_all, preprocess, ExtractionBackend, PooledColorBackend, PrecomputedOnly, INPUT_SIZE};
pub use format::{
    decode_cemb, decode_csv, encode_cemb, encode_csv, load_embeddings, save_embeddings, save_embeddings_csv,
    HEADER_LEN, LOADED_TAG, MAGIC, VERSION,
};
pub use matrix::EmbeddingMatrix;

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("not a CEMB file (bad magic)")]
    BadMagic,
    #[error("unsupported CEMB version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated embedding file: {0}")]
    Truncated(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in row {row} ({id})")]
    NonFinite { row: usize, id: String },
    #[error("duplicate image id {0:?}")]
    DuplicateId(String),
    #[error("image id {0:?} not present in embedding matrix")]
    MissingId(String),
    #[error("invalid embedding data: {0}")]
    Invalid(String),
    #[error("cannot decode image: {0}")]
    Decode(String),
    #[error("extraction backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("image {id}: {source}")]
    Image {
        id: String,
        #[source]
        source: Box<EmbeddingError>,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
