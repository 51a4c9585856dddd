use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// One social-media post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    pub user_id: String,
    /// UTC, second resolution.
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub hashtags: Vec<String>,
    pub likes: u64,
    pub comments: u64,
    pub shares: u64,
    pub is_original: bool,
    pub image_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub post_id: String,
    /// File path or opaque URI.
    pub source: String,
    pub animated: bool,
}

/// Engagement index of a post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engagement {
    Likes,
    Comments,
    Shares,
}

impl Engagement {
    pub const ALL: [Engagement; 3] = [Engagement::Likes, Engagement::Comments, Engagement::Shares];

    pub fn as_str(self) -> &'static str {
        match self {
            Engagement::Likes => "likes",
            Engagement::Comments => "comments",
            Engagement::Shares => "shares",
        }
    }

    pub fn of(self, post: &Post) -> u64 {
        match self {
            Engagement::Likes => post.likes,
            Engagement::Comments => post.comments,
            Engagement::Shares => post.shares,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngagementStats {
    pub likes: MeanSd,
    pub comments: MeanSd,
    pub shares: MeanSd,
}

/// Corpus counts. Everything except `n_posts` is computed over original
/// posts; a post counts as having images if it has any image, animated or
/// not.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_posts: usize,
    pub n_original_posts: usize,
    pub n_distinct_users: usize,
    pub n_posts_with_images: usize,
    pub n_images: usize,
    pub n_static_images: usize,
    /// Population mean / SD over original posts.
    pub engagement: EngagementStats,
}
