//! Mean silhouette coefficient with Euclidean distance.

use rand::seq::index::sample;
use rayon::prelude::*;

use super::{ClusterError, ClusterModel};
use crate::embedding::EmbeddingMatrix;
use crate::rng::rng_for;
use crate::scalar::Scalar;

/// Above this many points the score is computed on a fixed-seed uniform
/// subsample of this size.
pub const FULL_SILHOUETTE_MAX: usize = 20_000;
const SUBSAMPLE_SALT: u64 = 0x5115_0e77;

fn dist<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x.widen() - y.widen();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Silhouette of `model` over `m`. Rows of `m` must align with the model.
pub fn silhouette<T: Scalar>(m: &EmbeddingMatrix<T>, model: &ClusterModel) -> Result<f64, ClusterError> {
    if model.ids() != m.ids() {
        return Err(ClusterError::Invalid("model rows do not match the matrix".into()));
    }
    if m.n() > FULL_SILHOUETTE_MAX {
        let mut rng = rng_for(model.seed, &[SUBSAMPLE_SALT]);
        let mut idx = sample(&mut rng, m.n(), FULL_SILHOUETTE_MAX).into_vec();
        idx.sort_unstable();
        let rows: Vec<&[T]> = idx.iter().map(|&i| m.row(i)).collect();
        let labels: Vec<usize> = idx.iter().map(|&i| model.labels()[i]).collect();
        return silhouette_rows(&rows, &labels, model.k());
    }
    let rows: Vec<&[T]> = m.rows().collect();
    silhouette_rows(&rows, model.labels(), model.k())
}

/// Silhouette of an arbitrary labeling with labels in `0..k`.
pub fn silhouette_labels<T: Scalar>(
    m: &EmbeddingMatrix<T>,
    labels: &[usize],
    k: usize,
) -> Result<f64, ClusterError> {
    let rows: Vec<&[T]> = m.rows().collect();
    silhouette_rows(&rows, labels, k)
}

fn silhouette_rows<T: Scalar>(rows: &[&[T]], labels: &[usize], k: usize) -> Result<f64, ClusterError> {
    if k < 2 {
        return Err(ClusterError::SilhouetteUndefined(format!("k = {k}")));
    }
    let n = rows.len();
    if n < 3 {
        return Err(ClusterError::SilhouetteUndefined(format!("n = {n}")));
    }
    if labels.len() != n || labels.iter().any(|&l| l >= k) {
        return Err(ClusterError::Invalid("labels do not match rows".into()));
    }
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(ClusterError::SilhouetteUndefined("fewer than two non-empty clusters".into()));
    }

    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0f64; k];
            for (j, row) in rows.iter().enumerate() {
                if j != i {
                    sums[labels[j]] += dist(rows[i], row);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / n as f64)
}
