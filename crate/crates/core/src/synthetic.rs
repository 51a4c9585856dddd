//! Gaussian blob generators for synthetic corpora and tests.

use rand_distr::{Distribution, Normal};

use crate::embedding::{EmbeddingError, EmbeddingMatrix};
use crate::rng::rng_for;

/// One isotropic blob: `n` points around `center` with standard deviation
/// `sd`, ids `{prefix}{i:04}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub prefix: String,
    pub center: Vec<f64>,
    pub n: usize,
    pub sd: f64,
}

impl Blob {
    pub fn new(prefix: impl Into<String>, center: Vec<f64>, n: usize, sd: f64) -> Self {
        Self { prefix: prefix.into(), center, n, sd }
    }
}

/// Rows of all blobs in order, each blob drawn from its own seeded stream.
pub fn blob_rows(blobs: &[Blob], seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut rows = Vec::new();
    for (b, blob) in blobs.iter().enumerate() {
        let mut rng = rng_for(seed, &[b as u64]);
        let noise = Normal::new(0.0, blob.sd).expect("finite non-negative sd");
        for i in 0..blob.n {
            let v = blob.center.iter().map(|c| c + noise.sample(&mut rng)).collect();
            rows.push((format!("{}{i:04}", blob.prefix), v));
        }
    }
    rows
}

pub fn blob_matrix(blobs: &[Blob], seed: u64) -> Result<EmbeddingMatrix<f64>, EmbeddingError> {
    let dim = blobs.first().map_or(0, |b| b.center.len());
    EmbeddingMatrix::from_rows(blob_rows(blobs, seed), dim, "synthetic")
}

/// `k` blobs of `per` points in `dim` dimensions, centred at `spread` times
/// the first `k` unit vectors (wrapping with sign flips when `k > dim`).
/// Returns the matrix and the true blob index per row.
pub fn separated_blobs(
    k: usize,
    per: usize,
    dim: usize,
    spread: f64,
    sd: f64,
    seed: u64,
) -> Result<(EmbeddingMatrix<f64>, Vec<usize>), EmbeddingError> {
    let blobs: Vec<Blob> = (0..k)
        .map(|j| {
            let mut center = vec![0.0; dim];
            center[j % dim] = if (j / dim) % 2 == 0 { spread } else { -spread };
            Blob::new(format!("b{j}_"), center, per, sd)
        })
        .collect();
    let truth = (0..k).flat_map(|j| std::iter::repeat_n(j, per)).collect();
    Ok((blob_matrix(&blobs, seed)?, truth))
}
