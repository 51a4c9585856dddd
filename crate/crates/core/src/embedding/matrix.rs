use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EmbeddingError;
use crate::scalar::Scalar;

/// Row-major `n × d` feature matrix with one row per image ID.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EmbeddingMatrix<T = f32> {
    ids: Vec<String>,
    dim: usize,
    values: Vec<T>,
    backend_tag: String,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl<T: Scalar> PartialEq for EmbeddingMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
            && self.dim == other.dim
            && self.backend_tag == other.backend_tag
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.widen().to_bits() == b.widen().to_bits())
    }
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn new(
        ids: Vec<String>,
        dim: usize,
        values: Vec<T>,
        backend_tag: impl Into<String>,
    ) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::Invalid("dimension must be positive".into()));
        }
        if values.len() != ids.len() * dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: ids.len() * dim,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let row = pos / dim;
            return Err(EmbeddingError::NonFinite { row, id: ids[row].clone() });
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateId(id.clone()));
            }
        }
        Ok(Self { ids, dim, values, backend_tag: backend_tag.into(), index })
    }

    /// Build from per-row vectors; every row must have the same length.
    pub fn from_rows(
        rows: Vec<(String, Vec<T>)>,
        dim: usize,
        backend_tag: impl Into<String>,
    ) -> Result<Self, EmbeddingError> {
        let mut ids = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (id, row) in rows {
            if row.len() != dim {
                return Err(EmbeddingError::DimensionMismatch { expected: dim, found: row.len() });
            }
            ids.push(id);
            values.extend(row);
        }
        Self::new(ids, dim, values, backend_tag)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn backend_tag(&self) -> &str {
        &self.backend_tag
    }

    pub fn set_backend_tag(&mut self, tag: impl Into<String>) {
        self.backend_tag = tag.into();
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        if self.index.len() != self.ids.len() {
            // deserialized without the index
            return self.ids.iter().position(|x| x == id);
        }
        self.index.get(id).copied()
    }

    /// Rows for `ids`, in the given order.
    pub fn select(&self, ids: &[String]) -> Result<Self, EmbeddingError> {
        let mut values = Vec::with_capacity(ids.len() * self.dim);
        for id in ids {
            let i = self.position(id).ok_or_else(|| EmbeddingError::MissingId(id.clone()))?;
            values.extend_from_slice(self.row(i));
        }
        Self::new(ids.to_vec(), self.dim, values, self.backend_tag.clone())
    }

    pub fn cast<U: Scalar>(&self) -> EmbeddingMatrix<U> {
        let values = self.values.iter().map(|v| U::lit(v.widen())).collect();
        EmbeddingMatrix::new(self.ids.clone(), self.dim, values, self.backend_tag.clone())
            .expect("cast of a valid matrix")
    }

    /// Copy with every row scaled to unit Euclidean length (zero rows kept).
    pub fn l2_normalized(&self) -> Self {
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.dim) {
            let norm = row.iter().map(|v| v.widen() * v.widen()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in row.iter_mut() {
                    *v = T::lit(v.widen() / norm);
                }
            }
        }
        Self::new(self.ids.clone(), self.dim, values, format!("{}+l2", self.backend_tag))
            .expect("normalization keeps values finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            EmbeddingMatrix::<f32>::new(ids.clone(), 2, vec![0.0; 3], "t"),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            EmbeddingMatrix::<f32>::new(ids.clone(), 1, vec![0.0, f32::NAN], "t"),
            Err(EmbeddingError::NonFinite { row: 1, .. })
        ));
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            EmbeddingMatrix::<f32>::new(dup, 1, vec![0.0, 1.0], "t"),
            Err(EmbeddingError::DuplicateId(_))
        ));
    }

    #[test]
    fn select_and_normalize() {
        let m = EmbeddingMatrix::<f32>::from_rows(
            vec![("a".into(), vec![3.0, 4.0]), ("b".into(), vec![0.0, 0.0])],
            2,
            "t",
        )
        .unwrap();
        let s = m.select(&["b".to_string(), "a".to_string()]).unwrap();
        assert_eq!(s.row(1), &[3.0, 4.0]);
        assert!(m.select(&["zz".to_string()]).is_err());
        let n = m.l2_normalized();
        assert_eq!(n.row(0), &[0.6, 0.8]);
        assert_eq!(n.row(1), &[0.0, 0.0]);
        let wide: EmbeddingMatrix<f64> = m.cast();
        assert_eq!(wide.row(0), &[3.0, 4.0]);
    }
}
