//! Post-level text labels: the closed label sets, a baseline classifier,
//! evaluation and import of external predictions.

mod bayes;
mod labels;
mod metrics;
mod predictions;

pub use bayes::{char_ngrams, normalize, BayesConfig, NaiveBayes, BUNDLE_VERSION, CLASSIFIER_FILE, WEIGHTS_FILE};
pub use labels::{EmotionType, InfoTheme, Task};
pub use metrics::{evaluate, evaluate_keyed, ClassificationReport, LabelScores};
pub use predictions::{ingest_predictions, Coverage, PredictionReject, PredictionSet};

#[derive(Debug, thiserror::Error)]
pub enum TextModelError {
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("training data must contain at least two classes")]
    SingleClass,
    #[error("prediction and gold ids differ: {0}")]
    Misaligned(String),
    #[error("{0}")]
    Empty(&'static str),
    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),
    #[error("expected header `post_id,label`, found `{0}`")]
    Header(String),
    #[error("classifier bundle: {0}")]
    Bundle(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
