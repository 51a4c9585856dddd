use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use vistheme_core::embedding::load_embeddings;
use vistheme_core::layout::RunLayout;
use vistheme_core::refine::Refinement;
use vistheme_core::Embeddings;

use crate::error::ApiError;

/// A loaded run: its embedding matrix and refinement state.
pub struct Run {
    pub id: String,
    pub layout: RunLayout,
    pub matrix: Embeddings,
    pub state: Refinement,
}

impl Run {
    pub fn session_id(&self) -> String {
        format!("{}-r{}", self.id, self.state.round())
    }

    pub fn persist(&self) -> Result<(), ApiError> {
        self.layout
            .write_refinement(&self.state)
            .map(|_| ())
            .map_err(|e| ApiError::internal(format!("cannot write checkpoint: {e}")))
    }
}

pub type RunHandle = Arc<tokio::sync::Mutex<Run>>;

/// Runs live under `root/<run_id>/`. Each is loaded from its checkpoint on
/// first use and then kept in memory; every mutation is written back
/// before the response is sent.
pub struct Registry {
    root: PathBuf,
    runs: Mutex<HashMap<String, RunHandle>>,
}

pub fn valid_run_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl Registry {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into(), runs: Mutex::new(HashMap::new()) }
    }

    pub fn get(&self, id: &str) -> Result<RunHandle, ApiError> {
        if !valid_run_id(id) {
            return Err(ApiError::not_found(format!("unknown run {id:?}")));
        }
        let mut runs = self.runs.lock().expect("registry lock");
        if let Some(h) = runs.get(id) {
            return Ok(h.clone());
        }
        let layout = RunLayout::new(self.root.join(id));
        if !layout.checkpoint().exists() {
            return Err(ApiError::not_found(format!("unknown run {id:?}")));
        }
        let state = Refinement::load_checkpoint(&layout.checkpoint())
            .map_err(|e| ApiError::internal(format!("cannot load checkpoint of {id:?}: {e}")))?;
        let matrix = load_embeddings(&layout.embeddings())
            .map_err(|e| ApiError::internal(format!("cannot load embeddings of {id:?}: {e}")))?;
        let handle = Arc::new(tokio::sync::Mutex::new(Run { id: id.to_string(), layout, matrix, state }));
        runs.insert(id.to_string(), handle.clone());
        Ok(handle)
    }
}

/// Split `{run}-r{round}`.
pub fn parse_session_id(id: &str) -> Option<(&str, usize)> {
    let (run, round) = id.rsplit_once("-r")?;
    if round.is_empty() || !round.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((run, round.parse().ok()?))
}
