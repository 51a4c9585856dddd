use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_restarts, KMeansParams};
use super::silhouette::silhouette;
use super::{ClusterError, ClusterModel};
use crate::embedding::EmbeddingMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCandidate {
    pub k: usize,
    pub silhouette: f64,
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSearchResult {
    pub candidates: Vec<KCandidate>,
    pub chosen_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSearchParams {
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KSearchParams {
    fn default() -> Self {
        Self { k_min: 5, k_max: 20, seed: 0, restarts: 8, max_iter: 300, tol: 1e-6 }
    }
}

/// Pick `k` in `k_min..=k_max` by maximal silhouette (ties to the smaller
/// k). Returns the search table and the winning model.
pub fn select_k<T: Scalar>(
    m: &EmbeddingMatrix<T>,
    params: &KSearchParams,
) -> Result<(KSearchResult, ClusterModel), ClusterError> {
    if params.k_min < 2 || params.k_min > params.k_max {
        return Err(ClusterError::Invalid(format!(
            "need 2 <= k_min <= k_max, got {}..{}",
            params.k_min, params.k_max
        )));
    }
    if params.k_max > m.n() {
        return Err(ClusterError::TooFewPoints { n: m.n(), k: params.k_max });
    }
    let mut candidates = Vec::new();
    let mut best: Option<ClusterModel> = None;
    for k in params.k_min..=params.k_max {
        let km = KMeansParams { k, seed: params.seed, max_iter: params.max_iter, tol: params.tol };
        let mut model = kmeans_restarts(m, &km, params.restarts)?;
        let s = silhouette(m, &model)?;
        model.silhouette = Some(s);
        log::debug!("k = {k}: silhouette {s:.6}, inertia {:.6}", model.inertia);
        candidates.push(KCandidate { k, silhouette: s, inertia: model.inertia });
        if best.as_ref().is_none_or(|b| s > b.silhouette.unwrap_or(f64::NEG_INFINITY)) {
            best = Some(model);
        }
    }
    let best = best.expect("non-empty k range");
    Ok((KSearchResult { candidates, chosen_k: best.k() }, best))
}
