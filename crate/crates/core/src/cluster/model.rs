use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::embedding::{self, EmbeddingMatrix};
use crate::scalar::Scalar;
use crate::util::write_json_atomic;

/// A hard partition of image IDs into `k` clusters with their centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelFile", try_from = "ModelFile")]
pub struct ClusterModel {
    ids: Vec<String>,
    assignments: Vec<usize>,
    k: usize,
    dim: usize,
    /// k × dim, row-major.
    centroids: Vec<f64>,
    pub inertia: f64,
    pub silhouette: Option<f64>,
    pub seed: u64,
    pub iterations: usize,
    /// For clusters produced by a split: the parent cluster's index in the
    /// model that was split.
    pub lineage: Vec<Option<usize>>,
    /// Human theme per cluster, once assigned by refinement.
    pub themes: Vec<Option<String>>,
}

impl ClusterModel {
    /// Build a model from a positional labeling of `matrix`; centroids are
    /// the member means and inertia the within-cluster sum of squares.
    pub fn from_labels<T: Scalar>(
        matrix: &EmbeddingMatrix<T>,
        labels: Vec<usize>,
        k: usize,
        seed: u64,
    ) -> Result<Self, ClusterError> {
        if labels.len() != matrix.n() {
            return Err(ClusterError::Invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                matrix.n()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(ClusterError::Invalid(format!("label {bad} out of range for k = {k}")));
        }
        let centroids = super::kmeans::means(matrix, &labels, k);
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(ClusterError::Invalid(format!("cluster {j} has no members")));
        }
        let inertia = super::kmeans::inertia(matrix, &labels, &centroids);
        Ok(Self {
            ids: matrix.ids().to_vec(),
            assignments: labels,
            k,
            dim: matrix.dim(),
            centroids,
            inertia,
            silhouette: None,
            seed,
            iterations: 0,
            lineage: vec![None; k],
            themes: vec![None; k],
        })
    }

    pub(crate) fn from_parts(
        ids: Vec<String>,
        assignments: Vec<usize>,
        k: usize,
        dim: usize,
        centroids: Vec<f64>,
        inertia: f64,
        seed: u64,
        iterations: usize,
    ) -> Self {
        Self {
            ids,
            assignments,
            k,
            dim,
            centroids,
            inertia,
            silhouette: None,
            seed,
            iterations,
            lineage: vec![None; k],
            themes: vec![None; k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Cluster index per row, aligned with [`ids`](Self::ids).
    pub fn labels(&self) -> &[usize] {
        &self.assignments
    }

    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.dim..(j + 1) * self.dim]
    }

    pub fn assignment_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| self.assignments[i])
    }

    pub fn assignment_map(&self) -> BTreeMap<&str, usize> {
        self.ids.iter().map(String::as_str).zip(self.assignments.iter().copied()).collect()
    }

    /// Member IDs of cluster `j`, in matrix order.
    pub fn members(&self, j: usize) -> Vec<String> {
        self.ids
            .iter()
            .zip(&self.assignments)
            .filter(|&(_, &l)| l == j)
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.assignments {
            sizes[l] += 1;
        }
        sizes
    }

    /// Theme of cluster `j`, or `cluster_j` when none has been assigned.
    pub fn theme_name(&self, j: usize) -> String {
        self.themes
            .get(j)
            .and_then(Clone::clone)
            .unwrap_or_else(|| format!("cluster_{j}"))
    }

    /// Write `model.json` plus the centroid block (`centroids.cemb`, f32).
    pub fn save(&self, dir: &Path) -> Result<(), ClusterError> {
        std::fs::create_dir_all(dir)?;
        write_json_atomic(&dir.join("model.json"), self)?;
        let ids = (0..self.k).map(|j| format!("centroid_{j}")).collect();
        let values = self.centroids.iter().map(|&v| v as f32).collect();
        let block = EmbeddingMatrix::<f32>::new(ids, self.dim, values, "centroids")?;
        embedding::save_embeddings(&block, &dir.join("centroids.cemb"))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, ClusterError> {
        let text = std::fs::read_to_string(dir.join("model.json"))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub(crate) fn check_partition(&self) -> Result<(), ClusterError> {
        let sizes = self.sizes();
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(ClusterError::Invalid(format!("cluster {j} is empty")));
        }
        Ok(())
    }
}

/// JSON layout: assignments as an id → cluster map.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    k: usize,
    dim: usize,
    seed: u64,
    inertia: f64,
    silhouette: Option<f64>,
    iterations: usize,
    lineage: Vec<Option<usize>>,
    themes: Vec<Option<String>>,
    /// Row order of the source matrix.
    order: Vec<String>,
    assignments: BTreeMap<String, usize>,
    centroids: Vec<Vec<f64>>,
}

impl From<ClusterModel> for ModelFile {
    fn from(m: ClusterModel) -> Self {
        let assignments = m.ids.iter().cloned().zip(m.assignments.iter().copied()).collect();
        let centroids = m.centroids.chunks(m.dim.max(1)).map(<[f64]>::to_vec).collect();
        Self {
            k: m.k,
            dim: m.dim,
            seed: m.seed,
            inertia: m.inertia,
            silhouette: m.silhouette,
            iterations: m.iterations,
            lineage: m.lineage,
            themes: m.themes,
            order: m.ids,
            assignments,
            centroids,
        }
    }
}

impl TryFrom<ModelFile> for ClusterModel {
    type Error = ClusterError;

    fn try_from(f: ModelFile) -> Result<Self, ClusterError> {
        let mut assignments = Vec::with_capacity(f.order.len());
        for id in &f.order {
            let j = *f
                .assignments
                .get(id)
                .ok_or_else(|| ClusterError::Invalid(format!("image {id:?} has no assignment")))?;
            if j >= f.k {
                return Err(ClusterError::Invalid(format!("image {id:?} assigned to {j} >= k")));
            }
            assignments.push(j);
        }
        if f.assignments.len() != f.order.len() {
            return Err(ClusterError::Invalid("assignment map and row order differ".into()));
        }
        if f.centroids.len() != f.k || f.centroids.iter().any(|c| c.len() != f.dim) {
            return Err(ClusterError::Invalid("centroid block shape mismatch".into()));
        }
        if f.lineage.len() != f.k || f.themes.len() != f.k {
            return Err(ClusterError::Invalid("per-cluster metadata length mismatch".into()));
        }
        Ok(Self {
            ids: f.order,
            assignments,
            k: f.k,
            dim: f.dim,
            centroids: f.centroids.into_iter().flatten().collect(),
            inertia: f.inertia,
            silhouette: f.silhouette,
            seed: f.seed,
            iterations: f.iterations,
            lineage: f.lineage,
            themes: f.themes,
        })
    }
}

/// True when two labelings induce the same partition (up to relabeling).
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.iter().zip(b).all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}
