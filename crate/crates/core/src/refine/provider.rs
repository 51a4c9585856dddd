use std::collections::BTreeMap;

use super::Dispute;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelEvent {
    Coded { coder_id: String, image_id: String, theme: String },
    Adjudicated { image_id: String, theme: String },
}

pub struct LabelRequest<'a> {
    pub round: usize,
    /// Sampled image IDs per cluster id.
    pub samples: &'a BTreeMap<usize, Vec<String>>,
    /// Images still lacking an adjudicated theme.
    pub missing: Vec<String>,
    pub disputes: Vec<Dispute>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("label provider timed out")]
    Timeout,
    #[error("label provider unavailable: {0}")]
    Unavailable(String),
}

/// Source of labels for the sampled images of a round.
pub trait LabelProvider {
    fn provide(&mut self, request: &LabelRequest<'_>) -> Result<Vec<LabelEvent>, ProviderError>;
}

/// Answers from a fixed image → theme table; images absent from the table
/// stay unlabeled.
#[derive(Debug, Clone, Default)]
pub struct MapProvider {
    pub labels: BTreeMap<String, String>,
}

impl MapProvider {
    pub fn new(labels: BTreeMap<String, String>) -> Self {
        Self { labels }
    }
}

impl LabelProvider for MapProvider {
    fn provide(&mut self, request: &LabelRequest<'_>) -> Result<Vec<LabelEvent>, ProviderError> {
        Ok(request
            .missing
            .iter()
            .filter_map(|id| {
                self.labels
                    .get(id)
                    .map(|t| LabelEvent::Adjudicated { image_id: id.clone(), theme: t.clone() })
            })
            .collect())
    }
}
