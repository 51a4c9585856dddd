//! On-disk layout of a run directory shared by the CLI and the service.

use std::path::{Path, PathBuf};

use crate::corpus::CorpusStore;
use crate::refine::{RefineError, Refinement};
use crate::util::write_json_atomic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLayout {
    root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.root.join("corpus")
    }

    pub fn corpus_store(&self) -> CorpusStore {
        CorpusStore::new(self.corpus_dir())
    }

    pub fn embed_dir(&self) -> PathBuf {
        self.root.join("embed")
    }

    pub fn embeddings(&self) -> PathBuf {
        self.embed_dir().join("embeddings.cemb")
    }

    pub fn cluster_dir(&self) -> PathBuf {
        self.root.join("cluster")
    }

    pub fn refine_dir(&self) -> PathBuf {
        self.root.join("refine")
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.refine_dir().join("checkpoint.json")
    }

    /// Final themed model written when refinement finishes.
    pub fn refined_model_dir(&self) -> PathBuf {
        self.refine_dir().join("model")
    }

    pub fn classify_dir(&self) -> PathBuf {
        self.root.join("classify")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    /// Persist the checkpoint, and the round history and final model once
    /// refinement has finished.
    pub fn write_refinement(&self, state: &Refinement) -> Result<Vec<PathBuf>, RefineError> {
        std::fs::create_dir_all(self.refine_dir())?;
        let mut written = vec![self.checkpoint()];
        state.save_checkpoint(&self.checkpoint())?;
        let rounds = self.refine_dir().join("rounds.json");
        write_json_atomic(&rounds, &state.history())?;
        written.push(rounds);
        if let Some(out) = state.outcome() {
            let summary = self.refine_dir().join("outcome.json");
            write_json_atomic(
                &summary,
                &serde_json::json!({
                    "status": state.status().as_str(),
                    "rounds": state.history().len(),
                    "average_consistency": out.average_consistency,
                    "initial_average_consistency": out.initial_average_consistency,
                    "reports": out.reports,
                }),
            )?;
            written.push(summary);
            out.model.save(&self.refined_model_dir())?;
            written.push(self.refined_model_dir().join("model.json"));
            written.push(self.refined_model_dir().join("centroids.cemb"));
        }
        Ok(written)
    }
}
