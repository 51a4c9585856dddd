//! JSONL ingestion.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, ImageRecord, Post};

const FIELDS: [&str; 10] = [
    "post_id",
    "user_id",
    "created_at",
    "text",
    "hashtags",
    "likes",
    "comments",
    "shares",
    "is_original",
    "images",
];

/// Wire form of one input line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub user_id: String,
    pub created_at: String,
    pub text: String,
    pub hashtags: Vec<String>,
    pub likes: u64,
    pub comments: u64,
    pub shares: u64,
    pub is_original: bool,
    pub images: Vec<ImageEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageEntry {
    pub image_id: String,
    pub source: String,
    pub animated: bool,
}

impl PostRecord {
    pub fn from_post(post: &Post, images: &[&ImageRecord]) -> Self {
        Self {
            post_id: post.post_id.clone(),
            user_id: post.user_id.clone(),
            created_at: post.created_at.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            text: post.text.clone(),
            hashtags: post.hashtags.clone(),
            likes: post.likes,
            comments: post.comments,
            shares: post.shares,
            is_original: post.is_original,
            images: images
                .iter()
                .map(|im| ImageEntry { image_id: im.image_id.clone(), source: im.source.clone(), animated: im.animated })
                .collect(),
        }
    }
}

/// A line that could not be ingested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line number in the input file.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub rejects: Vec<Reject>,
    pub warnings: Vec<String>,
}

pub(crate) fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
        .map_err(|e| format!("created_at {raw:?} is not an ISO-8601 timestamp with offset: {e}"))
}

fn parse_line(raw: &str) -> Result<(PostRecord, Vec<String>), String> {
    let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("record is not a JSON object")?;
    let unknown: Vec<String> = obj.keys().filter(|k| !FIELDS.contains(&k.as_str())).cloned().collect();
    if let Some(missing) = FIELDS.iter().find(|f| !obj.contains_key(**f)) {
        return Err(format!("missing field `{missing}`"));
    }
    let rec: PostRecord = serde_json::from_value(value).map_err(|e| format!("invalid record: {e}"))?;
    if rec.post_id.is_empty() {
        return Err("empty post_id".into());
    }
    let mut seen = HashSet::new();
    for im in &rec.images {
        if im.image_id.is_empty() {
            return Err("empty image_id".into());
        }
        if !seen.insert(im.image_id.as_str()) {
            return Err(format!("image {:?} listed twice in one post", im.image_id));
        }
    }
    Ok((rec, unknown))
}

/// Parse a corpus JSONL stream. Malformed lines are rejected and reported;
/// a duplicate `post_id` or `image_id` aborts ingestion.
pub fn ingest_reader<R: BufRead>(reader: R) -> Result<IngestOutcome, CorpusError> {
    let mut posts = Vec::new();
    let mut images = Vec::new();
    let mut rejects = Vec::new();
    let mut unknown_fields = BTreeSet::new();
    let mut post_ids = HashSet::new();
    let mut image_ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (rec, unknown) = match parse_line(trimmed) {
            Ok(v) => v,
            Err(reason) => {
                rejects.push(Reject { line: line_no, reason });
                continue;
            }
        };
        let created_at = match parse_timestamp(&rec.created_at) {
            Ok(t) => t,
            Err(reason) => {
                rejects.push(Reject { line: line_no, reason });
                continue;
            }
        };
        unknown_fields.extend(unknown);
        if !post_ids.insert(rec.post_id.clone()) {
            return Err(CorpusError::DuplicatePost { post_id: rec.post_id, line: line_no });
        }
        for im in &rec.images {
            if !image_ids.insert(im.image_id.clone()) {
                return Err(CorpusError::DuplicateImage { image_id: im.image_id.clone(), line: line_no });
            }
            images.push(ImageRecord {
                image_id: im.image_id.clone(),
                post_id: rec.post_id.clone(),
                source: im.source.clone(),
                animated: im.animated,
            });
        }
        posts.push(Post {
            image_ids: rec.images.iter().map(|im| im.image_id.clone()).collect(),
            post_id: rec.post_id,
            user_id: rec.user_id,
            created_at,
            text: rec.text,
            hashtags: rec.hashtags,
            likes: rec.likes,
            comments: rec.comments,
            shares: rec.shares,
            is_original: rec.is_original,
        });
    }
    let warnings: Vec<String> =
        unknown_fields.into_iter().map(|f| format!("ignored unknown field `{f}`")).collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    for r in &rejects {
        log::warn!("line {}: {}", r.line, r.reason);
    }
    let corpus = Corpus::new(posts, images)?;
    Ok(IngestOutcome { corpus, rejects, warnings })
}
