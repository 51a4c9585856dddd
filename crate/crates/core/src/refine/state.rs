use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::consistency::{average_within_cluster_consistency, measure_consistency, ConsistencyReport};
use super::labels::{Dispute, LabelState, LabelStore};
use super::provider::{LabelEvent, LabelProvider, LabelRequest};
use super::split::{merge_by_theme, sample_members, split_members, MergeGroup};
use super::{DegenerateResolution, RefineConfig, RefineError};
use crate::cluster::{silhouette, ClusterModel};
use crate::embedding::EmbeddingMatrix;
use crate::rng::salted_seed;
use crate::scalar::Scalar;
use crate::util::write_json_atomic;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineStatus {
    NeedsLabels,
    Converged,
    MaxRounds,
}

impl RefineStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NeedsLabels => "needs_labels",
            Self::Converged => "converged",
            Self::MaxRounds => "max_rounds",
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Self::NeedsLabels
    }
}

/// A cluster during refinement. Ids are stable across rounds; sub-clusters
/// receive fresh ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveCluster {
    pub id: usize,
    pub parent: Option<usize>,
    pub members: Vec<String>,
    /// Last measurement; carried forward while the cluster is unchanged.
    pub report: Option<ConsistencyReport>,
    pub accepted: bool,
    pub sample_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Keep { cluster: usize },
    Split { cluster: usize, k: usize, into: Vec<usize>, forced: bool },
    EnlargeSample { cluster: usize, sample_size: usize },
    Accept { cluster: usize },
    Merge { theme: String, clusters: Vec<usize>, into: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Reports for every live cluster at the end of the round.
    pub reports: Vec<ConsistencyReport>,
    pub average_consistency: f64,
    pub actions: Vec<Action>,
    pub kappa: Option<f64>,
}

/// Sampling and labels of the open round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundState {
    pub round: usize,
    pub samples: BTreeMap<usize, Vec<String>>,
    pub labels: LabelStore,
    pub session_opened: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineOutcome {
    pub model: ClusterModel,
    /// Pooled reports per final cluster.
    pub reports: Vec<ConsistencyReport>,
    pub average_consistency: f64,
    pub initial_average_consistency: f64,
}

/// Resumable refinement state. Serializes as a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    version: u32,
    config: RefineConfig,
    fingerprint: String,
    clusters: Vec<LiveCluster>,
    next_id: usize,
    round: usize,
    current: Option<RoundState>,
    history: Vec<RoundRecord>,
    status: RefineStatus,
    outcome: Option<RefineOutcome>,
}

pub(crate) fn fingerprint<T: Scalar>(m: &EmbeddingMatrix<T>) -> String {
    const PRIME: u64 = 0x100_0000_01b3;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(&(m.dim() as u64).to_le_bytes());
    for id in m.ids() {
        eat(id.as_bytes());
        eat(&[0]);
    }
    for v in m.values() {
        eat(&v.widen().to_bits().to_le_bytes());
    }
    format!("{h:016x}")
}

impl Refinement {
    pub fn new<T: Scalar>(
        matrix: &EmbeddingMatrix<T>,
        model: &ClusterModel,
        config: RefineConfig,
    ) -> Result<Self, RefineError> {
        config.validate()?;
        if model.ids() != matrix.ids() {
            return Err(RefineError::Mismatch("cluster model and matrix list different image ids".into()));
        }
        let clusters = (0..model.k())
            .map(|j| LiveCluster {
                id: j,
                parent: None,
                members: model.members(j),
                report: None,
                accepted: false,
                sample_size: config.sample_size,
            })
            .collect();
        let mut r = Self {
            version: CHECKPOINT_VERSION,
            fingerprint: fingerprint(matrix),
            clusters,
            next_id: model.k(),
            round: 0,
            current: None,
            history: Vec::new(),
            status: RefineStatus::NeedsLabels,
            outcome: None,
            config,
        };
        r.open_round();
        Ok(r)
    }

    fn open_round(&mut self) {
        let samples = self
            .clusters
            .iter()
            .filter(|c| c.report.is_none() && !c.accepted)
            .map(|c| (c.id, sample_members(&c.members, c.sample_size, self.config.seed, self.round, c.id)))
            .collect();
        self.current = Some(RoundState {
            round: self.round,
            samples,
            labels: LabelStore::new(self.config.coders),
            session_opened: false,
        });
    }

    pub fn config(&self) -> &RefineConfig {
        &self.config
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn status(&self) -> RefineStatus {
        self.status
    }

    pub fn clusters(&self) -> &[LiveCluster] {
        &self.clusters
    }

    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    pub fn outcome(&self) -> Option<&RefineOutcome> {
        self.outcome.as_ref()
    }

    pub fn current(&self) -> Option<&RoundState> {
        self.current.as_ref()
    }

    pub fn current_mut(&mut self) -> Option<&mut RoundState> {
        self.current.as_mut()
    }

    fn open(&self) -> Result<&RoundState, RefineError> {
        self.current.as_ref().ok_or(RefineError::Finished(self.status))
    }

    fn open_mut(&mut self) -> Result<&mut RoundState, RefineError> {
        let status = self.status;
        self.current.as_mut().ok_or(RefineError::Finished(status))
    }

    /// Cluster id whose current sample contains `image_id`.
    pub fn sampled_cluster(&self, image_id: &str) -> Option<usize> {
        let cur = self.current.as_ref()?;
        cur.samples.iter().find(|(_, ids)| ids.iter().any(|i| i == image_id)).map(|(&c, _)| c)
    }

    pub fn submit_label(&mut self, coder_id: &str, image_id: &str, theme: &str) -> Result<LabelState, RefineError> {
        if self.sampled_cluster(image_id).is_none() {
            self.open()?;
            return Err(super::LabelError::NotSampled(image_id.to_string()).into());
        }
        Ok(self.open_mut()?.labels.submit(coder_id, image_id, theme)?)
    }

    pub fn adjudicate(&mut self, image_id: &str, theme: &str) -> Result<(), RefineError> {
        if self.sampled_cluster(image_id).is_none() {
            self.open()?;
            return Err(super::LabelError::NotSampled(image_id.to_string()).into());
        }
        Ok(self.open_mut()?.labels.adjudicate(image_id, theme)?)
    }

    pub fn disputes(&self) -> Vec<Dispute> {
        self.current.as_ref().map(|c| c.labels.disputes()).unwrap_or_default()
    }

    /// Sampled images without an adjudicated theme.
    pub fn missing(&self) -> Vec<String> {
        let Some(cur) = &self.current else { return Vec::new() };
        cur.samples
            .values()
            .flatten()
            .filter(|id| cur.labels.adjudicated(id).is_none())
            .cloned()
            .collect()
    }

    pub fn is_ready(&self) -> bool {
        self.current.is_some() && self.missing().is_empty()
    }

    fn clusters_missing_labels(&self) -> Vec<usize> {
        let Some(cur) = &self.current else { return Vec::new() };
        cur.samples
            .iter()
            .filter(|(_, ids)| ids.iter().any(|id| cur.labels.adjudicated(id).is_none()))
            .map(|(&c, _)| c)
            .collect()
    }

    /// Reports for all live clusters: carried ones, plus measurements of the
    /// open round over whatever labels are adjudicated so far.
    pub fn live_reports(&self) -> Vec<ConsistencyReport> {
        let mut out = Vec::new();
        for c in &self.clusters {
            if let Some(r) = &c.report {
                out.push(r.clone());
                continue;
            }
            let Some(cur) = &self.current else { continue };
            let Some(ids) = cur.samples.get(&c.id) else { continue };
            let themes = ids.iter().filter_map(|id| cur.labels.adjudicated(id));
            if let Ok(r) = measure_consistency(c.id, themes, &self.config) {
                out.push(r);
            }
        }
        out
    }

    /// Inconsistent clusters of the open round that have at most one
    /// significant theme, given complete labels.
    pub fn degenerate_clusters(&self) -> Result<Vec<usize>, RefineError> {
        Ok(self
            .measure_round()?
            .iter()
            .filter(|r| !r.consistent && r.significant_themes.len() <= 1)
            .map(|r| r.cluster)
            .collect())
    }

    fn measure_round(&self) -> Result<Vec<ConsistencyReport>, RefineError> {
        let cur = self.open()?;
        let missing = self.clusters_missing_labels();
        if !missing.is_empty() {
            return Err(RefineError::NeedsLabels { clusters: missing });
        }
        cur.samples
            .iter()
            .map(|(&c, ids)| {
                let themes = ids.iter().map(|id| cur.labels.adjudicated(id).expect("checked complete"));
                measure_consistency(c, themes, &self.config)
            })
            .collect()
    }

    fn check_matrix<T: Scalar>(&self, matrix: &EmbeddingMatrix<T>) -> Result<(), RefineError> {
        if fingerprint(matrix) != self.fingerprint {
            return Err(RefineError::Mismatch("fingerprint differs from the checkpoint".into()));
        }
        Ok(())
    }

    fn check_partition(&self, n: usize) -> Result<(), RefineError> {
        let mut seen = BTreeSet::new();
        for c in &self.clusters {
            if c.members.is_empty() {
                return Err(RefineError::Invariant(format!("cluster {} is empty", c.id)));
            }
            for id in &c.members {
                if !seen.insert(id.as_str()) {
                    return Err(RefineError::Invariant(format!("image {id:?} is in two clusters")));
                }
            }
        }
        if seen.len() != n {
            return Err(RefineError::Invariant(format!("{} of {n} images are assigned", seen.len())));
        }
        Ok(())
    }

    /// Close the open round: record reports, then split, enlarge, accept or
    /// finish. Degenerate clusters use `resolutions`, falling back to the
    /// configured policy. Nothing changes when an error is returned.
    pub fn advance<T: Scalar>(
        &mut self,
        matrix: &EmbeddingMatrix<T>,
        resolutions: &BTreeMap<usize, DegenerateResolution>,
    ) -> Result<&RoundRecord, RefineError> {
        self.check_matrix(matrix)?;
        let measured = self.measure_round()?;
        let mut unresolved = Vec::new();
        let mut plan: BTreeMap<usize, Option<DegenerateResolution>> = BTreeMap::new();
        for r in &measured {
            if r.consistent {
                continue;
            }
            if r.significant_themes.len() >= 2 {
                plan.insert(r.cluster, None);
            } else {
                match resolutions.get(&r.cluster).copied().or(self.config.degenerate.resolution()) {
                    Some(res) => {
                        plan.insert(r.cluster, Some(res));
                    }
                    None => unresolved.push(r.cluster),
                }
            }
        }
        if !unresolved.is_empty() {
            return Err(RefineError::DegenerateSplit { clusters: unresolved });
        }

        let kappa = self.open()?.labels.kappa().map(|k| k.kappa);
        let by_id: BTreeMap<usize, ConsistencyReport> = measured.into_iter().map(|r| (r.cluster, r)).collect();
        for c in &mut self.clusters {
            if let Some(r) = by_id.get(&c.id) {
                c.report = Some(r.clone());
            }
        }
        let reports: Vec<ConsistencyReport> = self.clusters.iter().filter_map(|c| c.report.clone()).collect();
        let average = average_within_cluster_consistency(&reports).unwrap_or(0.0);
        let mut actions = Vec::new();

        for (&id, res) in &plan {
            if *res == Some(DegenerateResolution::Accept) {
                let c = self.clusters.iter_mut().find(|c| c.id == id).expect("live cluster");
                c.accepted = true;
                actions.push(Action::Accept { cluster: id });
            }
        }
        let pending: Vec<usize> = plan
            .iter()
            .filter(|(_, r)| **r != Some(DegenerateResolution::Accept))
            .map(|(&id, _)| id)
            .collect();

        let last_round = self.round + 1 >= self.config.max_rounds;
        if pending.is_empty() || last_round {
            for c in &self.clusters {
                if !plan.contains_key(&c.id) {
                    actions.push(Action::Keep { cluster: c.id });
                }
            }
            let status = if pending.is_empty() { RefineStatus::Converged } else { RefineStatus::MaxRounds };
            let initial = self.history.first().map(|h| h.average_consistency).unwrap_or(average);
            actions.extend(self.finish(matrix, status, initial)?);
        } else {
            let mut next = Vec::with_capacity(self.clusters.len() + pending.len());
            for c in std::mem::take(&mut self.clusters) {
                if !pending.contains(&c.id) {
                    if !plan.contains_key(&c.id) {
                        actions.push(Action::Keep { cluster: c.id });
                    }
                    next.push(c);
                    continue;
                }
                let report = c.report.as_ref().expect("measured this round");
                let mut resolution = plan[&c.id];
                if resolution == Some(DegenerateResolution::EnlargeSample) && c.sample_size >= c.members.len() {
                    log::warn!("cluster {} is fully sampled; splitting in two instead of enlarging", c.id);
                    resolution = Some(DegenerateResolution::ForceSplit2);
                }
                if resolution == Some(DegenerateResolution::EnlargeSample) {
                    let sample_size = c.sample_size.saturating_mul(2);
                    actions.push(Action::EnlargeSample { cluster: c.id, sample_size });
                    next.push(LiveCluster { report: None, sample_size, ..c });
                    continue;
                }
                let k = if resolution.is_some() { 2 } else { report.significant_themes.len() };
                let seed = salted_seed(self.config.seed, &[self.round as u64, c.id as u64, 0x5911]);
                let groups = split_members(matrix, &c.members, k, seed, &self.config)?;
                let mut into = Vec::with_capacity(k);
                for members in groups {
                    let id = self.next_id;
                    self.next_id += 1;
                    into.push(id);
                    next.push(LiveCluster {
                        id,
                        parent: Some(c.id),
                        members,
                        report: None,
                        accepted: false,
                        sample_size: self.config.sample_size,
                    });
                }
                actions.push(Action::Split { cluster: c.id, k, into, forced: resolution.is_some() });
            }
            self.clusters = next;
            self.check_partition(matrix.n())?;
        }

        self.history.push(RoundRecord { round: self.round, reports, average_consistency: average, actions, kappa });
        if self.status == RefineStatus::NeedsLabels {
            self.round += 1;
            self.open_round();
        }
        Ok(self.history.last().expect("just pushed"))
    }

    fn finish<T: Scalar>(
        &mut self,
        matrix: &EmbeddingMatrix<T>,
        status: RefineStatus,
        initial: f64,
    ) -> Result<Vec<Action>, RefineError> {
        self.check_partition(matrix.n())?;
        let groups: Vec<MergeGroup> = self
            .clusters
            .iter()
            .map(|c| MergeGroup {
                members: c.members.clone(),
                theme: c.report.as_ref().expect("all clusters measured").dominant_theme.clone(),
            })
            .collect();
        let (mut model, placement) = merge_by_theme(matrix, &groups, self.config.seed)?;
        if model.k() >= 2 {
            model.silhouette = silhouette(matrix, &model).ok();
        }
        let mut constituents: Vec<Vec<usize>> = vec![Vec::new(); model.k()];
        for (c, &j) in self.clusters.iter().zip(&placement) {
            constituents[j].push(c.id);
        }
        let mut reports = Vec::with_capacity(model.k());
        let mut actions = Vec::new();
        for (j, ids) in constituents.iter().enumerate() {
            let parts = self.clusters.iter().filter(|c| ids.contains(&c.id)).filter_map(|c| c.report.as_ref());
            reports.push(ConsistencyReport::pooled(j, parts, &self.config)?);
            actions.push(Action::Merge { theme: model.theme_name(j), clusters: ids.clone(), into: j });
        }
        let average = average_within_cluster_consistency(&reports).unwrap_or(0.0);
        self.outcome = Some(RefineOutcome { model, reports, average_consistency: average, initial_average_consistency: initial });
        self.status = status;
        self.current = None;
        Ok(actions)
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<(), RefineError> {
        Ok(write_json_atomic(path, self)?)
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self, RefineError> {
        let r: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        if r.version != CHECKPOINT_VERSION {
            return Err(RefineError::Mismatch(format!("checkpoint version {} is not supported", r.version)));
        }
        r.config.validate()?;
        Ok(r)
    }

    /// Feed labels from `provider` and advance until a terminal status, or
    /// until the provider stops making progress.
    pub fn drive<T: Scalar, P: LabelProvider + ?Sized>(
        &mut self,
        matrix: &EmbeddingMatrix<T>,
        provider: &mut P,
    ) -> Result<RefineStatus, RefineError> {
        self.check_matrix(matrix)?;
        let mut stalled = 0;
        while self.status == RefineStatus::NeedsLabels {
            let missing = self.missing();
            if !missing.is_empty() {
                let before = missing.len();
                let cur = self.open()?;
                let request = LabelRequest {
                    round: cur.round,
                    samples: &cur.samples,
                    missing,
                    disputes: cur.labels.disputes(),
                };
                let events = match provider.provide(&request) {
                    Ok(events) => events,
                    Err(e) => {
                        log::warn!("round {}: {e}", self.round);
                        return Ok(RefineStatus::NeedsLabels);
                    }
                };
                for ev in events {
                    match ev {
                        LabelEvent::Coded { coder_id, image_id, theme } => {
                            self.submit_label(&coder_id, &image_id, &theme)?;
                        }
                        LabelEvent::Adjudicated { image_id, theme } => self.adjudicate(&image_id, &theme)?,
                    }
                }
                let after = self.missing().len();
                if after > 0 {
                    // one more pass lets a provider answer the disputes it created
                    stalled = if after < before { 0 } else { stalled + 1 };
                    if stalled >= 2 || self.disputes().is_empty() && after == before {
                        return Ok(RefineStatus::NeedsLabels);
                    }
                    continue;
                }
            }
            self.advance(matrix, &BTreeMap::new())?;
        }
        Ok(self.status)
    }
}

/// Result of a refinement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineRun {
    pub status: RefineStatus,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Option<RefineOutcome>,
    /// State to resume from when `status` is `needs_labels`.
    pub checkpoint: Refinement,
}

pub fn run_refinement<T: Scalar, P: LabelProvider + ?Sized>(
    matrix: &EmbeddingMatrix<T>,
    model: &ClusterModel,
    provider: &mut P,
    config: RefineConfig,
) -> Result<RefineRun, RefineError> {
    let mut state = Refinement::new(matrix, model, config)?;
    let status = state.drive(matrix, provider)?;
    Ok(RefineRun {
        status,
        rounds: state.history.clone(),
        outcome: state.outcome.clone(),
        checkpoint: state,
    })
}
