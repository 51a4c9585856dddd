//! Post and image corpus: ingestion, the on-disk store, the analysis-set
//! filter and engagement summaries.

mod ingest;
mod model;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use ingest::{ingest_reader, ImageEntry, IngestOutcome, PostRecord, Reject};
pub use model::{CorpusSummary, Engagement, EngagementStats, ImageRecord, MeanSd, Post};

use crate::cluster::ClusterModel;
use crate::stats::describe;
use crate::util::{write_atomic, write_json_atomic};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("duplicate post_id {post_id:?} (line {line})")]
    DuplicatePost { post_id: String, line: usize },
    #[error("duplicate image_id {image_id:?} (line {line})")]
    DuplicateImage { image_id: String, line: usize },
    #[error("image {image_id:?} refers to unknown post {post_id:?}")]
    DanglingImage { image_id: String, post_id: String },
    #[error("image {0:?} is not assigned in the cluster model")]
    UnassignedImage(String),
    #[error("unknown grouping {0:?} (expected with-images, without-images, image-presence or by-visual-theme)")]
    UnknownGrouping(String),
    #[error("unknown post {0:?}")]
    UnknownPost(String),
    #[error("corpus store at {0} is missing or incomplete")]
    MissingStore(PathBuf),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An immutable, validated set of posts and their images.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    posts: Vec<Post>,
    images: Vec<ImageRecord>,
    post_index: HashMap<String, usize>,
    image_index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(posts: Vec<Post>, images: Vec<ImageRecord>) -> Result<Self, CorpusError> {
        let mut post_index = HashMap::with_capacity(posts.len());
        for (i, p) in posts.iter().enumerate() {
            if post_index.insert(p.post_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicatePost { post_id: p.post_id.clone(), line: i + 1 });
            }
        }
        let mut image_index = HashMap::with_capacity(images.len());
        for (i, im) in images.iter().enumerate() {
            if image_index.insert(im.image_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateImage { image_id: im.image_id.clone(), line: i + 1 });
            }
            let owner = post_index.get(&im.post_id).map(|&p| &posts[p]);
            if !owner.is_some_and(|p| p.image_ids.contains(&im.image_id)) {
                return Err(CorpusError::DanglingImage {
                    image_id: im.image_id.clone(),
                    post_id: im.post_id.clone(),
                });
            }
        }
        for p in &posts {
            if let Some(missing) = p.image_ids.iter().find(|id| !image_index.contains_key(*id)) {
                return Err(CorpusError::DanglingImage { image_id: missing.clone(), post_id: p.post_id.clone() });
            }
        }
        Ok(Self { posts, images, post_index, image_index })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn images(&self) -> &[ImageRecord] {
        &self.images
    }

    pub fn post(&self, id: &str) -> Option<&Post> {
        self.post_index.get(id).map(|&i| &self.posts[i])
    }

    pub fn image(&self, id: &str) -> Option<&ImageRecord> {
        self.image_index.get(id).map(|&i| &self.images[i])
    }

    pub fn images_of<'a>(&'a self, post: &'a Post) -> impl Iterator<Item = &'a ImageRecord> + 'a {
        post.image_ids.iter().filter_map(move |id| self.image(id))
    }

    pub fn static_images_of<'a>(&'a self, post: &'a Post) -> impl Iterator<Item = &'a ImageRecord> + 'a {
        self.images_of(post).filter(|im| !im.animated)
    }

    pub fn summary(&self) -> CorpusSummary {
        let originals: Vec<&Post> = self.posts.iter().filter(|p| p.is_original).collect();
        let users: BTreeSet<&str> = originals.iter().map(|p| p.user_id.as_str()).collect();
        let n_images: usize = originals.iter().map(|p| p.image_ids.len()).sum();
        let n_static = originals.iter().map(|p| self.static_images_of(p).count()).sum();
        let stat = |e: Engagement| {
            let v: Vec<f64> = originals.iter().map(|p| e.of(p) as f64).collect();
            describe(&v).map(|d| MeanSd { mean: d.mean, sd: d.sd }).unwrap_or_default()
        };
        CorpusSummary {
            n_posts: self.posts.len(),
            n_original_posts: originals.len(),
            n_distinct_users: users.len(),
            n_posts_with_images: originals.iter().filter(|p| !p.image_ids.is_empty()).count(),
            n_images,
            n_static_images: n_static,
            engagement: EngagementStats {
                likes: stat(Engagement::Likes),
                comments: stat(Engagement::Comments),
                shares: stat(Engagement::Shares),
            },
        }
    }

    /// Sub-corpus containing only `post_ids` (unknown IDs are ignored), in
    /// corpus order.
    pub fn restrict(&self, post_ids: &AnalysisSet) -> Corpus {
        let keep: BTreeSet<&str> = post_ids.post_ids.iter().map(String::as_str).collect();
        let posts: Vec<Post> = self.posts.iter().filter(|p| keep.contains(p.post_id.as_str())).cloned().collect();
        let images = self.images.iter().filter(|im| keep.contains(im.post_id.as_str())).cloned().collect();
        Corpus::new(posts, images).expect("restriction of a valid corpus")
    }
}

/// The posts analysed downstream and the images eligible for clustering.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisSet {
    pub post_ids: Vec<String>,
    /// Static images of the selected posts, in corpus order.
    pub image_ids: Vec<String>,
}

/// Original posts only; the clustering universe is their static images.
pub fn filter_analysis_set(corpus: &Corpus) -> AnalysisSet {
    let posts: Vec<&Post> = corpus.posts().iter().filter(|p| p.is_original).collect();
    let image_ids = posts
        .iter()
        .flat_map(|p| corpus.static_images_of(p).map(|im| im.image_id.clone()))
        .collect();
    AnalysisSet { post_ids: posts.iter().map(|p| p.post_id.clone()).collect(), image_ids }
}

/// Most frequent cluster among the post's static images; ties go to the
/// lowest cluster index. `None` for posts without static images.
pub fn dominant_visual_theme(
    corpus: &Corpus,
    post: &Post,
    model: &ClusterModel,
) -> Result<Option<usize>, CorpusError> {
    let assignments = model.assignment_map();
    dominant_with(corpus, post, &assignments)
}

pub(crate) fn dominant_with(
    corpus: &Corpus,
    post: &Post,
    assignments: &BTreeMap<&str, usize>,
) -> Result<Option<usize>, CorpusError> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for im in corpus.static_images_of(post) {
        let j = assignments
            .get(im.image_id.as_str())
            .ok_or_else(|| CorpusError::UnassignedImage(im.image_id.clone()))?;
        *counts.entry(*j).or_default() += 1;
    }
    // BTreeMap iterates ascending, and max_by_key keeps the last maximum,
    // so reverse to favour the lowest index.
    Ok(counts.into_iter().rev().max_by_key(|&(_, c)| c).map(|(j, _)| j))
}

/// Dominant cluster index for every post in `post_ids`.
pub fn dominant_themes(
    corpus: &Corpus,
    post_ids: &[String],
    model: &ClusterModel,
) -> Result<BTreeMap<String, Option<usize>>, CorpusError> {
    let assignments = model.assignment_map();
    post_ids
        .iter()
        .map(|id| {
            let post = corpus.post(id).ok_or_else(|| CorpusError::UnknownPost(id.clone()))?;
            Ok((id.clone(), dominant_with(corpus, post, &assignments)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grouping<'a> {
    WithImages,
    WithoutImages,
    /// Both of the above.
    ImagePresence,
    /// Group by dominant visual theme name; posts without images are left
    /// out.
    ByVisualTheme(&'a ClusterModel),
}

impl<'a> Grouping<'a> {
    pub fn parse(key: &str, model: Option<&'a ClusterModel>) -> Result<Self, CorpusError> {
        match (key, model) {
            ("with-images", _) => Ok(Grouping::WithImages),
            ("without-images", _) => Ok(Grouping::WithoutImages),
            ("image-presence", _) => Ok(Grouping::ImagePresence),
            ("by-visual-theme", Some(m)) => Ok(Grouping::ByVisualTheme(m)),
            _ => Err(CorpusError::UnknownGrouping(key.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementRow {
    pub group: String,
    pub index: Engagement,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

pub const WITH_IMAGES: &str = "with-images";
pub const WITHOUT_IMAGES: &str = "without-images";

/// Mean and population SD of each engagement index per group. Groups with
/// no posts are omitted. Rows are ordered by group, then likes, comments,
/// shares.
pub fn engagement_summary(
    corpus: &Corpus,
    post_ids: &[String],
    grouping: &Grouping<'_>,
) -> Result<Vec<EngagementRow>, CorpusError> {
    let mut groups: Vec<(String, Vec<&Post>)> = Vec::new();
    let posts: Vec<&Post> = post_ids
        .iter()
        .map(|id| corpus.post(id).ok_or_else(|| CorpusError::UnknownPost(id.clone())))
        .collect::<Result<_, _>>()?;
    let (with, without): (Vec<&Post>, Vec<&Post>) = posts.iter().partition(|p| !p.image_ids.is_empty());
    match grouping {
        Grouping::WithImages => groups.push((WITH_IMAGES.into(), with)),
        Grouping::WithoutImages => groups.push((WITHOUT_IMAGES.into(), without)),
        Grouping::ImagePresence => {
            groups.push((WITH_IMAGES.into(), with));
            groups.push((WITHOUT_IMAGES.into(), without));
        }
        Grouping::ByVisualTheme(model) => {
            let assignments = model.assignment_map();
            let mut by: BTreeMap<usize, Vec<&Post>> = BTreeMap::new();
            for p in posts {
                if let Some(j) = dominant_with(corpus, p, &assignments)? {
                    by.entry(j).or_default().push(p);
                }
            }
            groups.extend(by.into_iter().map(|(j, ps)| (model.theme_name(j), ps)));
        }
    }
    let mut rows = Vec::new();
    for (name, members) in groups {
        for index in Engagement::ALL {
            let values: Vec<f64> = members.iter().map(|p| index.of(p) as f64).collect();
            if let Some(d) = describe(&values) {
                rows.push(EngagementRow { group: name.clone(), index, n: d.n, mean: d.mean, sd: d.sd });
            }
        }
    }
    Ok(rows)
}

/// Single-directory corpus store: `posts.jsonl` is the source of record
/// (normalized input records), `index.json` is derived from it.
#[derive(Debug, Clone)]
pub struct CorpusStore {
    dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreIndex {
    version: u32,
    summary: CorpusSummary,
    rejects: usize,
    /// Directory that relative image sources resolve against.
    #[serde(default)]
    source_root: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub summary: CorpusSummary,
    pub rejects: Vec<Reject>,
    pub warnings: Vec<String>,
}

impl CorpusStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn posts_path(&self) -> PathBuf {
        self.dir.join("posts.jsonl")
    }

    pub fn index_path(&self) -> PathBuf {
        self.dir.join("index.json")
    }

    pub fn rejects_path(&self) -> PathBuf {
        self.dir.join("rejects.jsonl")
    }

    /// Replace the store contents with the records of `input`.
    pub fn ingest(&self, input: &Path) -> Result<IngestReport, CorpusError> {
        let outcome = ingest_reader(BufReader::new(File::open(input)?))?;
        let root = std::fs::canonicalize(input)?.parent().map(Path::to_path_buf);
        self.write_with_root(&outcome.corpus, &outcome.rejects, root)?;
        Ok(IngestReport {
            summary: outcome.corpus.summary(),
            rejects: outcome.rejects,
            warnings: outcome.warnings,
        })
    }

    pub fn write(&self, corpus: &Corpus, rejects: &[Reject]) -> Result<(), CorpusError> {
        self.write_with_root(corpus, rejects, None)
    }

    fn write_with_root(&self, corpus: &Corpus, rejects: &[Reject], source_root: Option<PathBuf>) -> Result<(), CorpusError> {
        std::fs::create_dir_all(&self.dir)?;
        write_atomic(&self.posts_path(), |w| {
            for p in corpus.posts() {
                let images: Vec<&ImageRecord> = corpus.images_of(p).collect();
                serde_json::to_writer(&mut *w, &PostRecord::from_post(p, &images))?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })?;
        write_atomic(&self.rejects_path(), |w| {
            for r in rejects {
                serde_json::to_writer(&mut *w, r)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })?;
        let index = StoreIndex { version: 1, summary: corpus.summary(), rejects: rejects.len(), source_root };
        write_json_atomic(&self.index_path(), &index)?;
        Ok(())
    }

    /// Absolute path of an image source: relative sources resolve against
    /// the directory of the ingested file.
    pub fn resolve_source(&self, source: &str) -> Result<PathBuf, CorpusError> {
        let p = Path::new(source);
        if p.is_absolute() {
            return Ok(p.to_path_buf());
        }
        let index: StoreIndex = serde_json::from_slice(&std::fs::read(self.index_path())?)?;
        Ok(index.source_root.unwrap_or_else(|| self.dir.clone()).join(p))
    }

    pub fn load(&self) -> Result<Corpus, CorpusError> {
        let path = self.posts_path();
        if !path.exists() || !self.index_path().exists() {
            return Err(CorpusError::MissingStore(self.dir.clone()));
        }
        let outcome = ingest_reader(BufReader::new(File::open(path)?))?;
        if let Some(r) = outcome.rejects.first() {
            return Err(CorpusError::Io(std::io::Error::other(format!(
                "corrupt corpus store, line {}: {}",
                r.line, r.reason
            ))));
        }
        Ok(outcome.corpus)
    }
}
