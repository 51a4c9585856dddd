use std::collections::BTreeMap;

use super::{RefineConfig, RefineError};
use crate::cluster::{kmeans_restarts, ClusterError, ClusterModel, KMeansParams};
use crate::embedding::EmbeddingMatrix;
use crate::rng::rng_for;
use crate::scalar::Scalar;

/// Uniform sample without replacement of `n` members, returned in member
/// order. The draw depends on `(seed, round, cluster)` only.
pub fn sample_members(members: &[String], n: usize, seed: u64, round: usize, cluster: usize) -> Vec<String> {
    if members.len() <= n {
        return members.to_vec();
    }
    let mut rng = rng_for(seed, &[round as u64, cluster as u64]);
    let mut picked = rand::seq::index::sample(&mut rng, members.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| members[i].clone()).collect()
}

pub fn sample_cluster(
    model: &ClusterModel,
    cluster: usize,
    config: &RefineConfig,
    round: usize,
) -> Result<Vec<String>, RefineError> {
    if cluster >= model.k() {
        return Err(RefineError::UnknownCluster(cluster));
    }
    Ok(sample_members(&model.members(cluster), config.sample_size, config.seed, round, cluster))
}

/// Re-cluster `members` into `k` groups with k-means. Groups come back
/// ordered by their first member's position in `members`.
pub fn split_members<T: Scalar>(
    matrix: &EmbeddingMatrix<T>,
    members: &[String],
    k: usize,
    seed: u64,
    config: &RefineConfig,
) -> Result<Vec<Vec<String>>, RefineError> {
    if k < 2 || members.len() < k {
        return Err(RefineError::Invariant(format!(
            "cannot split {} members into {k} clusters",
            members.len()
        )));
    }
    let sub = matrix.select(members).map_err(ClusterError::from)?;
    let params = KMeansParams { k, seed, max_iter: config.max_iter, tol: config.tol };
    let model = kmeans_restarts(&sub, &params, config.restarts)?;
    let mut groups: Vec<Vec<String>> = vec![Vec::new(); k];
    for (id, &l) in members.iter().zip(model.labels()) {
        groups[l].push(id.clone());
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(RefineError::Invariant("split produced an empty cluster".into()));
    }
    let first: BTreeMap<&str, usize> = members.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    groups.sort_by_key(|g| first[g[0].as_str()]);
    Ok(groups)
}

/// Split into one sub-cluster per significant theme.
pub fn split_cluster<T: Scalar>(
    matrix: &EmbeddingMatrix<T>,
    members: &[String],
    significant_themes: &[String],
    seed: u64,
    config: &RefineConfig,
) -> Result<Vec<Vec<String>>, RefineError> {
    if significant_themes.len() <= 1 {
        return Err(RefineError::DegenerateSplit { clusters: Vec::new() });
    }
    split_members(matrix, members, significant_themes.len(), seed, config)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeGroup {
    pub members: Vec<String>,
    pub theme: String,
}

/// Union groups sharing a theme. Final clusters are ordered by descending
/// size, ties by theme name. Returns the model and, per input group, its
/// final cluster index.
pub fn merge_by_theme<T: Scalar>(
    matrix: &EmbeddingMatrix<T>,
    groups: &[MergeGroup],
    seed: u64,
) -> Result<(ClusterModel, Vec<usize>), RefineError> {
    let mut by_theme: BTreeMap<&str, usize> = BTreeMap::new();
    for g in groups {
        *by_theme.entry(g.theme.as_str()).or_default() += g.members.len();
    }
    let mut order: Vec<(&str, usize)> = by_theme.into_iter().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: BTreeMap<&str, usize> = order.iter().enumerate().map(|(j, (t, _))| (*t, j)).collect();

    const UNSET: usize = usize::MAX;
    let mut labels = vec![UNSET; matrix.n()];
    let mut placement = Vec::with_capacity(groups.len());
    for g in groups {
        let j = index[g.theme.as_str()];
        placement.push(j);
        for id in &g.members {
            let i = matrix
                .position(id)
                .ok_or_else(|| RefineError::Mismatch(format!("image {id:?} is not in the matrix")))?;
            if labels[i] != UNSET {
                return Err(RefineError::Invariant(format!("image {id:?} is in two clusters")));
            }
            labels[i] = j;
        }
    }
    if let Some(i) = labels.iter().position(|&l| l == UNSET) {
        return Err(RefineError::Invariant(format!(
            "image {:?} is in no cluster",
            matrix.ids()[i]
        )));
    }
    let mut model = ClusterModel::from_labels(matrix, labels, order.len(), seed)?;
    model.themes = order.iter().map(|(t, _)| Some(t.to_string())).collect();
    Ok((model, placement))
}
