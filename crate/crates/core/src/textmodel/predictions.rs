//! Import of externally produced post labels (`post_id,label` CSV).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{Task, TextModelError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionReject {
    /// 1-based line number, counting the header as line 1.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub n_posts: usize,
    pub n_labeled: usize,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub task: Task,
    pub labels: BTreeMap<String, String>,
    /// Rows whose post is not in the analysis set; ignored.
    pub unknown_posts: Vec<String>,
    pub rejects: Vec<PredictionReject>,
    pub coverage: Coverage,
}

impl PredictionSet {
    pub fn label(&self, post_id: &str) -> Option<&str> {
        self.labels.get(post_id).map(String::as_str)
    }
}

/// Read predictions for `expected` posts. Unknown labels and duplicate rows
/// are rejected; posts outside `expected` are counted and ignored.
pub fn ingest_predictions<R: Read>(
    reader: R,
    task: Task,
    expected: &BTreeSet<String>,
) -> Result<PredictionSet, TextModelError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "post_id" || &header[1] != "label" {
        return Err(TextModelError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut labels = BTreeMap::new();
    let mut unknown_posts = Vec::new();
    let mut rejects = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                rejects.push(PredictionReject { line, reason: e.to_string() });
                continue;
            }
        };
        let (post, label) = (&row[0], &row[1]);
        if post.is_empty() {
            rejects.push(PredictionReject { line, reason: "empty post_id".into() });
        } else if task.index_of(label).is_none() {
            rejects.push(PredictionReject {
                line,
                reason: format!("unknown {} label {label:?}", task.as_str()),
            });
        } else if !expected.contains(post) {
            unknown_posts.push(post.to_string());
        } else if labels.contains_key(post) {
            rejects.push(PredictionReject { line, reason: format!("duplicate post_id {post:?}") });
        } else {
            labels.insert(post.to_string(), label.to_string());
        }
    }
    if !unknown_posts.is_empty() {
        log::warn!("{} prediction rows reference posts outside the analysis set", unknown_posts.len());
    }
    let coverage = Coverage {
        n_posts: expected.len(),
        n_labeled: labels.len(),
        coverage: if expected.is_empty() { 0.0 } else { labels.len() as f64 / expected.len() as f64 },
    };
    Ok(PredictionSet { task, labels, unknown_posts, rejects, coverage })
}
