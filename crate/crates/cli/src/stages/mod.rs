//! Pipeline stages. Each stage checks its prerequisites, skips itself when
//! its recorded inputs and outputs are unchanged, and records hashes on
//! success.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use vistheme_core::cluster::ClusterModel;
use vistheme_core::corpus::{filter_analysis_set, AnalysisSet, Corpus};
use vistheme_core::layout::RunLayout;
use vistheme_core::textmodel::Task;
use vistheme_core::util::write_atomic;
use vistheme_core::Embeddings;

use crate::config::Config;
use crate::error::missing_stage;
use crate::manifest::Manifest;

pub mod classify;
pub mod cluster;
pub mod embed;
pub mod eval;
pub mod ingest;
pub mod refine;
pub mod report;
pub mod stats;

pub const INGEST: &str = "ingest";
pub const EMBED: &str = "embed";
pub const CLUSTER: &str = "cluster";
pub const REFINE: &str = "refine";
pub const STATS: &str = "stats";
pub const REPORT: &str = "report";

pub fn classify_stage(task: Task) -> String {
    format!("classify-{}", task.as_str())
}

pub struct Ctx {
    pub layout: RunLayout,
    pub config: Config,
    pub manifest: Manifest,
}

impl Ctx {
    pub fn open(run_dir: &Path, config: Config) -> anyhow::Result<Self> {
        std::fs::create_dir_all(run_dir).with_context(|| format!("cannot create {}", run_dir.display()))?;
        let layout = RunLayout::new(run_dir);
        let run_id = run_dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "run".into());
        let manifest = Manifest::load_or_new(&layout.manifest(), &run_id, &config)?;
        Ok(Self { layout, config, manifest })
    }

    pub fn root(&self) -> &Path {
        self.layout.root()
    }

    pub fn require(&self, stage: &str, by: &str) -> anyhow::Result<()> {
        if self.manifest.is_complete(stage) {
            Ok(())
        } else {
            Err(missing_stage(stage, by))
        }
    }

    /// True, with a log line, when `stage` can be skipped.
    pub fn up_to_date(&self, stage: &str, inputs: &BTreeMap<String, String>, params: &serde_json::Value) -> bool {
        let fresh = self.manifest.up_to_date(self.root(), stage, inputs, params);
        if fresh {
            println!("{stage}: up to date");
        }
        fresh
    }

    pub fn finish(
        &mut self,
        stage: &str,
        inputs: BTreeMap<String, String>,
        params: serde_json::Value,
        outputs: &[PathBuf],
    ) -> anyhow::Result<()> {
        let root = self.root().to_path_buf();
        self.manifest.record(&root, stage, inputs, params, outputs)?;
        self.save()
    }

    pub fn save(&self) -> anyhow::Result<()> {
        self.manifest.save(&self.layout.manifest())
    }

    pub fn corpus(&self) -> anyhow::Result<Corpus> {
        Ok(self.layout.corpus_store().load()?)
    }

    pub fn embeddings(&self) -> anyhow::Result<Embeddings> {
        Ok(vistheme_core::embedding::load_embeddings(&self.layout.embeddings())?)
    }

    pub fn cluster_model_dir(&self) -> PathBuf {
        self.layout.cluster_dir().join("model")
    }

    pub fn refined_model(&self) -> anyhow::Result<ClusterModel> {
        Ok(ClusterModel::load(&self.layout.refined_model_dir())?)
    }

    pub fn post_types_path(&self) -> PathBuf {
        self.layout.refine_dir().join("post_types.csv")
    }

    pub fn labels_path(&self, task: Task) -> PathBuf {
        self.layout.classify_dir().join(task.as_str()).join("labels.csv")
    }
}

pub fn analysis_set(corpus: &Corpus) -> AnalysisSet {
    filter_analysis_set(corpus)
}

pub fn analysis_posts(corpus: &Corpus) -> BTreeSet<String> {
    analysis_set(corpus).post_ids.into_iter().collect()
}

/// Write a CSV file atomically from a header and rows.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
    write_atomic(path, |f| f.write_all(&bytes))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    write_atomic(path, |f| f.write_all(text.as_bytes()))?;
    Ok(())
}

/// Read a two-column CSV with the given header into an ordered map.
pub fn read_pairs(path: &Path, header: [&str; 2]) -> anyhow::Result<BTreeMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let h = rdr.headers()?.clone();
    if h.len() != 2 || h[0] != *header[0] || h[1] != *header[1] {
        anyhow::bail!("{}: expected header `{},{}`", path.display(), header[0], header[1]);
    }
    let mut out = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        if out.insert(row[0].to_string(), row[1].to_string()).is_some() {
            anyhow::bail!("{}: duplicate id {:?} on line {}", path.display(), &row[0], i + 2);
        }
    }
    Ok(out)
}

/// `post_id → image type` written by the refine stage.
pub fn read_post_types(ctx: &Ctx) -> anyhow::Result<BTreeMap<String, String>> {
    read_pairs(&ctx.post_types_path(), ["post_id", "image_type"])
}

pub fn read_labels(ctx: &Ctx, task: Task) -> anyhow::Result<BTreeMap<String, String>> {
    read_pairs(&ctx.labels_path(task), ["post_id", "label"])
}
