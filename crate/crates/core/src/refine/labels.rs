//! Per-round label store with two-coder adjudication.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::stats::{cohens_kappa, KappaResult};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("theme must be non-empty")]
    EmptyTheme,
    #[error("coder id must be non-empty")]
    EmptyCoder,
    #[error("image {0:?} is already adjudicated")]
    AlreadyAdjudicated(String),
    #[error("image {0:?} is not in the current sample")]
    NotSampled(String),
    #[error("coder {coder:?} would be a third coder; this round is coded by {existing:?}")]
    TooManyCoders { coder: String, existing: Vec<String> },
}

/// One coder's theme for one sampled image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationLabel {
    pub image_id: String,
    pub cluster: usize,
    pub coder_id: String,
    pub theme: String,
}

/// What happened to an image after a label was stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum LabelState {
    /// Waiting for the other coder.
    Pending,
    Adjudicated { theme: String },
    /// Coders disagree; an explicit adjudication label is required.
    Disputed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dispute {
    pub image_id: String,
    pub labels: BTreeMap<String, String>,
}

/// Labels for one round. With `coders_required == 1` a single label
/// adjudicates; with 2, agreement of both coders does, and disagreement
/// queues the image for an explicit adjudication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStore {
    coders_required: usize,
    coders: Vec<String>,
    coded: BTreeMap<String, BTreeMap<String, String>>,
    adjudicated: BTreeMap<String, String>,
}

impl LabelStore {
    pub fn new(coders_required: usize) -> Self {
        Self {
            coders_required: coders_required.clamp(1, 2),
            coders: Vec::new(),
            coded: BTreeMap::new(),
            adjudicated: BTreeMap::new(),
        }
    }

    pub fn coders_required(&self) -> usize {
        self.coders_required
    }

    pub fn coders(&self) -> &[String] {
        &self.coders
    }

    pub fn submit(&mut self, coder_id: &str, image_id: &str, theme: &str) -> Result<LabelState, LabelError> {
        let theme = theme.trim();
        if theme.is_empty() {
            return Err(LabelError::EmptyTheme);
        }
        if coder_id.is_empty() {
            return Err(LabelError::EmptyCoder);
        }
        if self.adjudicated.contains_key(image_id) {
            return Err(LabelError::AlreadyAdjudicated(image_id.to_string()));
        }
        if !self.coders.iter().any(|c| c == coder_id) {
            if self.coders.len() >= self.coders_required {
                return Err(LabelError::TooManyCoders {
                    coder: coder_id.to_string(),
                    existing: self.coders.clone(),
                });
            }
            self.coders.push(coder_id.to_string());
        }
        let entry = self.coded.entry(image_id.to_string()).or_default();
        entry.insert(coder_id.to_string(), theme.to_string());
        if entry.len() < self.coders_required {
            return Ok(LabelState::Pending);
        }
        let first = entry.values().next().expect("non-empty").clone();
        if entry.values().all(|t| *t == first) {
            self.adjudicated.insert(image_id.to_string(), first.clone());
            Ok(LabelState::Adjudicated { theme: first })
        } else {
            Ok(LabelState::Disputed)
        }
    }

    /// Record the consensus theme for an image that is not yet adjudicated.
    pub fn adjudicate(&mut self, image_id: &str, theme: &str) -> Result<(), LabelError> {
        let theme = theme.trim();
        if theme.is_empty() {
            return Err(LabelError::EmptyTheme);
        }
        if self.adjudicated.contains_key(image_id) {
            return Err(LabelError::AlreadyAdjudicated(image_id.to_string()));
        }
        self.adjudicated.insert(image_id.to_string(), theme.to_string());
        Ok(())
    }

    pub fn adjudicated(&self, image_id: &str) -> Option<&str> {
        self.adjudicated.get(image_id).map(String::as_str)
    }

    pub fn adjudicated_all(&self) -> &BTreeMap<String, String> {
        &self.adjudicated
    }

    pub fn coder_labels(&self, image_id: &str) -> Option<&BTreeMap<String, String>> {
        self.coded.get(image_id)
    }

    pub fn state(&self, image_id: &str) -> Option<LabelState> {
        if let Some(t) = self.adjudicated.get(image_id) {
            return Some(LabelState::Adjudicated { theme: t.clone() });
        }
        let coded = self.coded.get(image_id)?;
        if coded.len() >= self.coders_required {
            Some(LabelState::Disputed)
        } else {
            Some(LabelState::Pending)
        }
    }

    /// Disputed images awaiting adjudication, in image-id order.
    pub fn disputes(&self) -> Vec<Dispute> {
        self.coded
            .iter()
            .filter(|(id, labels)| labels.len() >= self.coders_required && !self.adjudicated.contains_key(*id))
            .map(|(id, labels)| Dispute { image_id: id.clone(), labels: labels.clone() })
            .collect()
    }

    /// Kappa between the two coders over images both have labeled.
    pub fn kappa(&self) -> Option<KappaResult<f64>> {
        if self.coders.len() < 2 {
            return None;
        }
        let (a, b) = (&self.coders[0], &self.coders[1]);
        let (la, lb): (Vec<&String>, Vec<&String>) = self
            .coded
            .values()
            .filter_map(|m| Some((m.get(a)?, m.get(b)?)))
            .unzip();
        cohens_kappa(&la, &lb).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agreement_adjudicates() {
        let mut s = LabelStore::new(2);
        assert_eq!(s.submit("c1", "x", "Posters").unwrap(), LabelState::Pending);
        assert_eq!(
            s.submit("c2", "x", "Posters").unwrap(),
            LabelState::Adjudicated { theme: "Posters".into() }
        );
        assert_eq!(s.adjudicated("x"), Some("Posters"));
        assert_eq!(s.submit("c1", "x", "Food"), Err(LabelError::AlreadyAdjudicated("x".into())));
    }

    #[test]
    fn disagreement_is_disputed_until_adjudicated() {
        let mut s = LabelStore::new(2);
        s.submit("c1", "x", "Posters").unwrap();
        assert_eq!(s.submit("c2", "x", "Food").unwrap(), LabelState::Disputed);
        assert_eq!(s.disputes().len(), 1);
        s.adjudicate("x", "Food").unwrap();
        assert!(s.disputes().is_empty());
        assert_eq!(s.adjudicated("x"), Some("Food"));
        assert!(s.adjudicate("x", "Food").is_err());
    }

    #[test]
    fn coder_may_revise_before_adjudication() {
        let mut s = LabelStore::new(2);
        s.submit("c1", "x", "Posters").unwrap();
        s.submit("c2", "x", "Food").unwrap();
        let st = s.submit("c1", "x", "Food").unwrap();
        assert_eq!(st, LabelState::Adjudicated { theme: "Food".into() });
    }

    #[test]
    fn rejects_bad_labels() {
        let mut s = LabelStore::new(2);
        assert_eq!(s.submit("c1", "x", "  "), Err(LabelError::EmptyTheme));
        s.submit("c1", "x", "A").unwrap();
        s.submit("c2", "y", "A").unwrap();
        assert!(matches!(s.submit("c3", "z", "A"), Err(LabelError::TooManyCoders { .. })));
    }

    #[test]
    fn single_coder_mode() {
        let mut s = LabelStore::new(1);
        assert_eq!(s.submit("me", "x", "A").unwrap(), LabelState::Adjudicated { theme: "A".into() });
        assert!(s.kappa().is_none());
    }

    #[test]
    fn kappa_over_double_coded() {
        let mut s = LabelStore::new(2);
        for (i, (a, b)) in [("A", "A"), ("B", "B"), ("A", "B"), ("B", "B")].iter().enumerate() {
            s.submit("c1", &format!("i{i}"), a).unwrap();
            s.submit("c2", &format!("i{i}"), b).unwrap();
        }
        s.submit("c1", "lonely", "A").unwrap();
        let k = s.kappa().unwrap();
        assert_eq!(k.n, 4);
        assert!((k.observed - 0.75).abs() < 1e-15);
    }
}
