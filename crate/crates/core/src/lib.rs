//! Analysis kernels for crisis-period social media corpora: image feature
//! matrices, K-means with silhouette model selection, consistency-guided
//! split/merge refinement, lexical text labeling, and the contingency /
//! ANOVA / agreement statistics that relate the two modalities.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the widths used by the rest of the workspace.

pub mod cluster;
pub mod corpus;
pub mod embedding;
pub mod layout;
pub mod refine;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod synthetic;
pub mod textmodel;
pub mod util;

pub use scalar::Scalar;

/// Feature storage width.
pub type Embeddings = embedding::EmbeddingMatrix<f32>;
pub type Embeddings64 = embedding::EmbeddingMatrix<f64>;
pub type ChiSquare = stats::ChiSquareResult<f64>;
pub type Anova = stats::AnovaResult<f64>;
pub type Kappa = stats::KappaResult<f64>;
pub type Descriptive = stats::Descriptive<f64>;
