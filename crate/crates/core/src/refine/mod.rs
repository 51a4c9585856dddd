//! Human-in-the-loop refinement: sample each cluster, measure theme
//! consistency from coder labels, split inconsistent clusters and merge
//! clusters that share a dominant theme.

mod consistency;
mod evaluate;
mod labels;
mod provider;
mod split;
mod state;

pub use consistency::{average_within_cluster_consistency, measure_consistency, ConsistencyReport};
pub use evaluate::{evaluate_clustering, ClusterRecall, ClusteringEvaluation};
pub use labels::{AnnotationLabel, Dispute, LabelError, LabelState, LabelStore};
pub use provider::{LabelEvent, LabelProvider, LabelRequest, MapProvider, ProviderError};
pub use split::{merge_by_theme, sample_cluster, sample_members, split_cluster, split_members, MergeGroup};
pub use state::{
    run_refinement, Action, LiveCluster, RefineOutcome, RefineRun, RefineStatus, Refinement, RoundRecord,
    RoundState, CHECKPOINT_VERSION,
};

use serde::{Deserialize, Serialize};

/// Theme vocabulary used for the crisis image corpus.
pub const IMAGE_THEMES: [&str; 6] = ["Posters", "TextImages", "IndoorObjects", "OutdoorScenes", "People", "Food"];

/// How to handle an inconsistent cluster with at most one significant theme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DegenerateResolution {
    #[serde(rename = "force_split_2")]
    ForceSplit2,
    #[serde(rename = "enlarge_sample")]
    EnlargeSample,
    #[serde(rename = "accept")]
    Accept,
}

impl DegenerateResolution {
    pub const ALL: [DegenerateResolution; 3] = [Self::ForceSplit2, Self::EnlargeSample, Self::Accept];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ForceSplit2 => "force_split_2",
            Self::EnlargeSample => "enlarge_sample",
            Self::Accept => "accept",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// Default handling of degenerate splits. `Ask` surfaces
/// [`RefineError::DegenerateSplit`] so a caller can choose per cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    Ask,
    #[serde(rename = "force_split_2")]
    ForceSplit2,
    EnlargeSample,
    Accept,
}

impl DegeneratePolicy {
    pub fn resolution(self) -> Option<DegenerateResolution> {
        match self {
            Self::Ask => None,
            Self::ForceSplit2 => Some(DegenerateResolution::ForceSplit2),
            Self::EnlargeSample => Some(DegenerateResolution::EnlargeSample),
            Self::Accept => Some(DegenerateResolution::Accept),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    /// Images sampled per cluster each round.
    pub sample_size: usize,
    /// A cluster is consistent when its top prevalence exceeds this.
    pub dominance_threshold: f64,
    /// Themes whose prevalence exceeds this drive the split count.
    pub significance_threshold: f64,
    pub max_rounds: usize,
    pub seed: u64,
    /// 1 or 2 coders per image.
    pub coders: usize,
    pub degenerate: DegeneratePolicy,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            sample_size: 50,
            dominance_threshold: 0.60,
            significance_threshold: 0.20,
            max_rounds: 4,
            seed: 0,
            coders: 2,
            degenerate: DegeneratePolicy::ForceSplit2,
            restarts: 4,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        let bad = |m: &str| Err(RefineError::InvalidConfig(m.to_string()));
        if self.sample_size == 0 {
            return bad("sample_size must be at least 1");
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        if !(self.significance_threshold > 0.0
            && self.significance_threshold <= self.dominance_threshold
            && self.dominance_threshold <= 1.0)
        {
            return bad("thresholds must satisfy 0 < significance <= dominance <= 1");
        }
        if !(1..=2).contains(&self.coders) {
            return bad("coders must be 1 or 2");
        }
        if !(self.tol >= 0.0) || self.max_iter == 0 {
            return bad("tol must be >= 0 and max_iter >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RefineError {
    #[error("invalid refinement config: {0}")]
    InvalidConfig(String),
    #[error("labels are missing for clusters {clusters:?}")]
    NeedsLabels { clusters: Vec<usize> },
    #[error("clusters {clusters:?} are inconsistent but have at most one significant theme")]
    DegenerateSplit { clusters: Vec<usize> },
    #[error("unknown cluster {0}")]
    UnknownCluster(usize),
    #[error("refinement already finished with status {0:?}")]
    Finished(RefineStatus),
    #[error("embedding matrix does not match the refinement state: {0}")]
    Mismatch(String),
    #[error("cannot evaluate clustering: {0}")]
    Evaluation(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Cluster(#[from] crate::cluster::ClusterError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
