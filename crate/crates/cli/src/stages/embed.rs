use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use vistheme_core::embedding::{extract_all, load_embeddings, save_embeddings, ExtractionBackend, PooledColorBackend};
use vistheme_core::util::write_json_atomic;

use super::{analysis_set, Ctx, EMBED, INGEST};
use crate::error::invalid_config;
use crate::manifest::hash_inputs;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedMeta {
    pub backend: String,
    pub n: usize,
    pub dim: usize,
}

pub enum Source<'a> {
    /// Precomputed CEMB or CSV file, labeled with a backend name.
    File { path: &'a Path, backend: &'a str },
    Pooled,
    Onnx { config: &'a Path },
}

pub fn meta_path(ctx: &Ctx) -> PathBuf {
    ctx.layout.embed_dir().join("meta.json")
}

pub fn read_meta(ctx: &Ctx) -> anyhow::Result<EmbedMeta> {
    Ok(serde_json::from_slice(&std::fs::read(meta_path(ctx))?)?)
}

pub fn run(ctx: &mut Ctx, source: Source<'_>) -> anyhow::Result<()> {
    ctx.require(INGEST, EMBED)?;
    let store = ctx.layout.corpus_store();
    let posts = store.posts_path();
    let (inputs, params) = match &source {
        Source::File { path, backend } => {
            (hash_inputs(&[("posts", &posts), ("embeddings", path)])?, json!({"source": "file", "backend": backend}))
        }
        Source::Pooled => (hash_inputs(&[("posts", &posts)])?, json!({"source": "pooled"})),
        Source::Onnx { config } => {
            (hash_inputs(&[("posts", &posts), ("onnx_config", config)])?, json!({"source": "onnx"}))
        }
    };
    if ctx.up_to_date(EMBED, &inputs, &params) {
        return Ok(());
    }
    let corpus = ctx.corpus()?;
    let ids = analysis_set(&corpus).image_ids;
    if ids.is_empty() {
        anyhow::bail!("the analysis set has no static images to embed");
    }
    let (mut matrix, backend) = match source {
        Source::File { path, backend } => {
            let all = load_embeddings(path)?;
            let missing: Vec<&String> = ids.iter().filter(|id| all.position(id).is_none()).collect();
            if !missing.is_empty() {
                anyhow::bail!(
                    "{} has no vector for {} analysis image(s), first {:?}",
                    path.display(),
                    missing.len(),
                    missing[0]
                );
            }
            (all.select(&ids)?, backend.to_string())
        }
        Source::Pooled => extract(&ctx.layout.corpus_store(), &corpus, &ids, &PooledColorBackend)?,
        Source::Onnx { config } => onnx(&ctx.layout.corpus_store(), &corpus, &ids, config)?,
    };
    matrix.set_backend_tag(backend.clone());
    save_embeddings(&matrix, &ctx.layout.embeddings())?;
    let meta = EmbedMeta { backend, n: matrix.n(), dim: matrix.dim() };
    write_json_atomic(&meta_path(ctx), &meta)?;
    println!("embed: {} images × {} dims ({})", meta.n, meta.dim, meta.backend);
    let outputs = [ctx.layout.embeddings(), meta_path(ctx)];
    ctx.finish(EMBED, inputs, params, &outputs)
}

fn extract<B: ExtractionBackend>(
    store: &vistheme_core::corpus::CorpusStore,
    corpus: &vistheme_core::corpus::Corpus,
    ids: &[String],
    backend: &B,
) -> anyhow::Result<(vistheme_core::Embeddings, String)> {
    let images = ids
        .iter()
        .map(|id| {
            let im = corpus.image(id).expect("analysis image is in the corpus");
            Ok((id.clone(), store.resolve_source(&im.source)?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok((extract_all(backend, &images)?, backend.name().to_string()))
}

#[cfg(feature = "onnx")]
fn onnx(
    store: &vistheme_core::corpus::CorpusStore,
    corpus: &vistheme_core::corpus::Corpus,
    ids: &[String],
    config: &Path,
) -> anyhow::Result<(vistheme_core::Embeddings, String)> {
    use vistheme_core::embedding::onnx::{OnnxBackend, OnnxConfig};
    let cfg = OnnxConfig::from_file(config).map_err(|e| invalid_config(e.to_string()))?;
    let backend = OnnxBackend::load(cfg)?;
    extract(store, corpus, ids, &backend)
}

#[cfg(not(feature = "onnx"))]
fn onnx(
    _store: &vistheme_core::corpus::CorpusStore,
    _corpus: &vistheme_core::corpus::Corpus,
    _ids: &[String],
    _config: &Path,
) -> anyhow::Result<(vistheme_core::Embeddings, String)> {
    Err(invalid_config("this build has no ONNX support; rebuild with `--features onnx`"))
}

