//! Lloyd's algorithm with k-means++ seeding.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClusterError, ClusterModel};
use crate::embedding::EmbeddingMatrix;
use crate::rng::rng_for;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once no centroid moves by this much (Euclidean) or more.
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, seed, max_iter: 300, tol: 1e-6 }
    }
}

#[inline]
pub(crate) fn sq_dist<T: Scalar>(x: &[T], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(&a, &b)| {
            let d = a.widen() - b;
            d * d
        })
        .sum()
}

/// Nearest centroid to `x`; ties go to the lower index.
#[inline]
fn nearest<T: Scalar>(x: &[T], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(dim).enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub(crate) fn means<T: Scalar>(m: &EmbeddingMatrix<T>, labels: &[usize], k: usize) -> Vec<f64> {
    let d = m.dim();
    let mut sums = vec![0f64; k * d];
    let mut counts = vec![0usize; k];
    for (row, &l) in m.rows().zip(labels) {
        counts[l] += 1;
        for (s, &v) in sums[l * d..(l + 1) * d].iter_mut().zip(row) {
            *s += v.widen();
        }
    }
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            for s in &mut sums[j * d..(j + 1) * d] {
                *s /= c as f64;
            }
        }
    }
    sums
}

pub(crate) fn inertia<T: Scalar>(m: &EmbeddingMatrix<T>, labels: &[usize], centroids: &[f64]) -> f64 {
    let d = m.dim();
    m.rows().zip(labels).map(|(row, &l)| sq_dist(row, &centroids[l * d..(l + 1) * d])).sum()
}

fn seed_plus_plus<T: Scalar>(m: &EmbeddingMatrix<T>, k: usize, seed: u64) -> Vec<f64> {
    let n = m.n();
    let d = m.dim();
    let mut rng = rng_for(seed, &[0x6b6d_6561_6e73]);
    let mut chosen = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen.push(first);
    let widen = |i: usize| m.row(i).iter().map(|v| v.widen()).collect::<Vec<f64>>();
    let mut centroids = widen(first);
    let mut d2: Vec<f64> = m.rows().map(|r| sq_dist(r, &centroids[..d])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every remaining point coincides with a chosen centre
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        let c = widen(next);
        for (w, r) in d2.iter_mut().zip(m.rows()) {
            *w = w.min(sq_dist(r, &c));
        }
        centroids.extend(c);
    }
    centroids
}

/// Give every empty cluster the point currently farthest from its centroid,
/// taken from a cluster that keeps at least one member.
fn repair_empty<T: Scalar>(
    m: &EmbeddingMatrix<T>,
    labels: &mut [usize],
    costs: &mut [f64],
    centroids: &mut [f64],
    k: usize,
) -> bool {
    let d = m.dim();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut repaired = false;
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None::<usize>, |best, i| match best {
                Some(b) if costs[b] >= costs[i] => Some(b),
                _ => Some(i),
            })
            .expect("n >= k leaves a donor");
        sizes[labels[donor]] -= 1;
        sizes[j] = 1;
        labels[donor] = j;
        costs[donor] = 0.0;
        for (c, &v) in centroids[j * d..(j + 1) * d].iter_mut().zip(m.row(donor)) {
            *c = v.widen();
        }
        repaired = true;
    }
    repaired
}

/// K-means over the rows of `m`. Deterministic in `(m, params)`.
pub fn kmeans<T: Scalar>(m: &EmbeddingMatrix<T>, params: &KMeansParams) -> Result<ClusterModel, ClusterError> {
    let n = m.n();
    let k = params.k;
    let d = m.dim();
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    if k == 0 {
        return Err(ClusterError::Invalid("k must be at least 1".into()));
    }
    if n < k {
        return Err(ClusterError::TooFewPoints { n, k });
    }
    if !(params.tol >= 0.0) {
        return Err(ClusterError::Invalid(format!("tol must be >= 0, got {}", params.tol)));
    }

    let mut centroids = seed_plus_plus(m, k, params.seed);
    let mut labels = vec![0usize; n];
    let mut costs = vec![0f64; n];
    let mut last_inertia = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..params.max_iter.max(1) {
        iterations += 1;
        let assigned: Vec<(usize, f64)> =
            (0..n).into_par_iter().map(|i| nearest(m.row(i), &centroids, d)).collect();
        for (i, (l, c)) in assigned.into_iter().enumerate() {
            labels[i] = l;
            costs[i] = c;
        }
        repair_empty(m, &mut labels, &mut costs, &mut centroids, k);
        let current: f64 = costs.iter().sum();
        debug_assert!(
            current <= last_inertia * (1.0 + 1e-9) + 1e-9,
            "inertia rose from {last_inertia} to {current}"
        );
        last_inertia = current;

        let updated = means(m, &labels, k);
        let shift = updated
            .chunks_exact(d)
            .zip(centroids.chunks_exact(d))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        if shift < params.tol || shift == 0.0 {
            break;
        }
    }
    let inertia = inertia(m, &labels, &centroids);
    let model =
        ClusterModel::from_parts(m.ids().to_vec(), labels, k, d, centroids, inertia, params.seed, iterations);
    debug_assert!(model.check_partition().is_ok());
    Ok(model)
}

/// Best of `restarts` runs by inertia; later restarts win only when strictly
/// better.
pub fn kmeans_restarts<T: Scalar>(
    m: &EmbeddingMatrix<T>,
    params: &KMeansParams,
    restarts: usize,
) -> Result<ClusterModel, ClusterError> {
    let mut best: Option<ClusterModel> = None;
    for r in 0..restarts.max(1) {
        let seed = crate::rng::salted_seed(params.seed, &[params.k as u64, r as u64]);
        let model = kmeans(m, &KMeansParams { seed, ..*params })?;
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::same_partition;

    fn pairs() -> EmbeddingMatrix<f64> {
        EmbeddingMatrix::from_rows(
            vec![
                ("a".into(), vec![0.0, 0.0]),
                ("b".into(), vec![0.0, 1.0]),
                ("c".into(), vec![10.0, 10.0]),
                ("d".into(), vec![10.0, 11.0]),
            ],
            2,
            "t",
        )
        .unwrap()
    }

    #[test]
    fn separates_point_pairs() {
        // of the seven 2-partitions of four points, {ab}{cd} has the smallest
        // SSE (1.0); every other split costs at least 100
        for seed in 0..20 {
            let m = kmeans(&pairs(), &KMeansParams::new(2, seed)).unwrap();
            assert!(same_partition(m.labels(), &[0, 0, 1, 1]), "seed {seed}");
            let first = m.labels()[0];
            assert_eq!(m.centroid(first), &[0.0, 0.5]);
            assert_eq!(m.centroid(1 - first), &[10.0, 10.5]);
            assert!((m.inertia - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cluster_is_column_mean() {
        let m = kmeans(&pairs(), &KMeansParams::new(1, 3)).unwrap();
        assert_eq!(m.centroid(0), &[5.0, 5.5]);
        // n · total variance = 4 · (25 + 25.25)
        assert!((m.inertia - 201.0).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n() {
        let m = kmeans(&pairs(), &KMeansParams::new(4, 9)).unwrap();
        assert_eq!(m.inertia, 0.0);
        assert_eq!(m.sizes(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn coincident_points_still_fill_every_cluster() {
        let m = EmbeddingMatrix::<f32>::from_rows((0..5).map(|i| (format!("p{i}"), vec![1.0, 1.0])).collect(), 2, "t")
            .unwrap();
        let model = kmeans(&m, &KMeansParams::new(3, 1)).unwrap();
        assert!(model.sizes().iter().all(|&s| s >= 1));
        assert_eq!(model.inertia, 0.0);
    }

    #[test]
    fn errors() {
        let empty = EmbeddingMatrix::<f32>::new(vec![], 2, vec![], "t").unwrap();
        assert!(matches!(kmeans(&empty, &KMeansParams::new(1, 0)), Err(ClusterError::Empty)));
        assert!(matches!(kmeans(&pairs(), &KMeansParams::new(5, 0)), Err(ClusterError::TooFewPoints { .. })));
        let bad_tol = KMeansParams { tol: -1.0, ..KMeansParams::new(2, 0) };
        assert!(kmeans(&pairs(), &bad_tol).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let m = pairs();
        let a = kmeans_restarts(&m, &KMeansParams::new(2, 42), 4).unwrap();
        let b = kmeans_restarts(&m, &KMeansParams::new(2, 42), 4).unwrap();
        assert_eq!(a, b);
    }
}
