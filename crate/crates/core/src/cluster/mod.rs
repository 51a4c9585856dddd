//! K-means clustering and silhouette-based choice of K.

mod kmeans;
mod model;
mod select;
mod silhouette;

pub use kmeans::{kmeans, kmeans_restarts, KMeansParams};
pub use model::{same_partition, ClusterModel};
pub use select::{select_k, KCandidate, KSearchParams, KSearchResult};
pub use silhouette::{silhouette, silhouette_labels, FULL_SILHOUETTE_MAX};

#[derive(Debug, thiserror::Error)]
pub enum ClusterError {
    #[error("cannot cluster an empty matrix")]
    Empty,
    #[error("need at least k points: n = {n}, k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("silhouette undefined: {0}")]
    SilhouetteUndefined(String),
    #[error("invalid clustering input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Embedding(#[from] crate::embedding::EmbeddingError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
