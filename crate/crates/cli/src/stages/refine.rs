use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use vistheme_core::cluster::ClusterModel;
use vistheme_core::corpus::dominant_themes;
use vistheme_core::refine::{
    average_within_cluster_consistency, ConsistencyReport, MapProvider, Refinement,
};
use vistheme_core::util::write_json_atomic;

use super::{analysis_set, embed, read_pairs, write_csv, Ctx, CLUSTER, REFINE};
use crate::error::invalid_config;
use crate::manifest::hash_inputs;

/// Row source for the consistency comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineSummary {
    pub backend: String,
    pub method: String,
    pub split_merge: bool,
    pub status: String,
    pub rounds: usize,
    pub k_initial: usize,
    pub k_final: usize,
    pub initial_average_consistency: f64,
    pub average_consistency: f64,
    pub themes: Vec<String>,
}

pub fn summary_path(root: &Path) -> PathBuf {
    root.join("refine").join("summary.json")
}

pub enum Labels<'a> {
    File(&'a Path),
    /// Resume or open the checkpoint for labeling through the service.
    Interactive,
}

pub fn run(ctx: &mut Ctx, labels: Labels<'_>) -> anyhow::Result<()> {
    ctx.require(CLUSTER, REFINE)?;
    let model_dir = ctx.cluster_model_dir();
    let mut named = vec![("model", model_dir.join("model.json")), ("embeddings", ctx.layout.embeddings())];
    if let Labels::File(p) = labels {
        named.push(("labels", p.to_path_buf()));
    }
    let pairs: Vec<(&str, &Path)> = named.iter().map(|(n, p)| (*n, p.as_path())).collect();
    let inputs = hash_inputs(&pairs)?;
    let cfg = ctx.config.refine_config();
    let split_merge = ctx.config.refine.split_merge;
    let params = json!({"refine": cfg, "split_merge": split_merge});
    if ctx.up_to_date(REFINE, &inputs, &params) {
        return Ok(());
    }
    ctx.manifest.mark_incomplete(REFINE);
    ctx.save()?;

    let matrix = ctx.embeddings()?;
    let model = ClusterModel::load(&model_dir)?;
    let mut outputs: Vec<PathBuf> = Vec::new();
    let state = match labels {
        Labels::File(path) => {
            let gold = read_pairs(path, ["image_id", "theme"])?;
            let mut state = Refinement::new(&matrix, &model, cfg)?;
            if split_merge {
                state.drive(&matrix, &mut MapProvider::new(gold))?;
            } else {
                for id in state.missing() {
                    if let Some(t) = gold.get(&id) {
                        state.adjudicate(&id, t)?;
                    }
                }
            }
            state
        }
        Labels::Interactive if !split_merge => {
            return Err(invalid_config("refinement with split_merge = false needs --labels"));
        }
        Labels::Interactive => {
            let cp = ctx.layout.checkpoint();
            match cp.exists().then(|| Refinement::load_checkpoint(&cp)).transpose()? {
                Some(state) if state.config() == &cfg => state,
                _ => Refinement::new(&matrix, &model, cfg)?,
            }
        }
    };
    outputs.extend(ctx.layout.write_refinement(&state)?);

    let (final_model, summary) = if split_merge {
        match state.outcome() {
            Some(out) if state.status().is_terminal() => {
                let s = RefineSummary {
                    backend: String::new(),
                    method: "kmeans".into(),
                    split_merge: true,
                    status: state.status().as_str().into(),
                    rounds: state.history().len(),
                    k_initial: model.k(),
                    k_final: out.model.k(),
                    initial_average_consistency: out.initial_average_consistency,
                    average_consistency: out.average_consistency,
                    themes: (0..out.model.k()).map(|j| out.model.theme_name(j)).collect(),
                };
                (out.model.clone(), s)
            }
            _ => return pending(ctx, &state),
        }
    } else {
        if !state.is_ready() {
            return pending(ctx, &state);
        }
        let reports = state.live_reports();
        measured_only(ctx, &model, &reports, &mut outputs)?
    };

    let summary = RefineSummary { backend: embed::read_meta(ctx)?.backend, ..summary };
    let path = summary_path(ctx.root());
    write_json_atomic(&path, &summary)?;
    outputs.push(path);

    let corpus = ctx.corpus()?;
    let posts = analysis_set(&corpus).post_ids;
    let dominant = dominant_themes(&corpus, &posts, &final_model)?;
    let types = ctx.post_types_path();
    write_csv(
        &types,
        &["post_id", "image_type"],
        posts
            .iter()
            .filter_map(|p| dominant[p].map(|j| [p.clone(), final_model.theme_name(j)])),
    )?;
    outputs.push(types);
    println!(
        "refine: {} after {} round(s), average consistency {:.4} -> {:.4}, themes {:?}",
        summary.status,
        summary.rounds,
        summary.initial_average_consistency,
        summary.average_consistency,
        summary.themes
    );
    ctx.finish(REFINE, inputs, params, &outputs)
}

fn pending(ctx: &Ctx, state: &Refinement) -> anyhow::Result<()> {
    println!(
        "refine: round {} needs labels for {} image(s); checkpoint at {}",
        state.round(),
        state.missing().len(),
        ctx.layout.checkpoint().display()
    );
    Ok(())
}

/// Consistency of the initial clusters, themed by their dominant labels.
fn measured_only(
    ctx: &Ctx,
    model: &ClusterModel,
    reports: &[ConsistencyReport],
    outputs: &mut Vec<PathBuf>,
) -> anyhow::Result<(ClusterModel, RefineSummary)> {
    let by_cluster: BTreeMap<usize, &ConsistencyReport> = reports.iter().map(|r| (r.cluster, r)).collect();
    let mut themed = model.clone();
    themed.themes = (0..model.k()).map(|j| by_cluster.get(&j).map(|r| r.dominant_theme.clone())).collect();
    themed.save(&ctx.layout.refined_model_dir())?;
    outputs.push(ctx.layout.refined_model_dir().join("model.json"));
    outputs.push(ctx.layout.refined_model_dir().join("centroids.cemb"));
    let avg = average_within_cluster_consistency(reports).unwrap_or(0.0);
    let outcome = ctx.layout.refine_dir().join("outcome.json");
    write_json_atomic(
        &outcome,
        &json!({"status": "measured", "rounds": 0, "average_consistency": avg,
                "initial_average_consistency": avg, "reports": reports}),
    )?;
    outputs.push(outcome);
    let s = RefineSummary {
        backend: String::new(),
        method: "kmeans".into(),
        split_merge: false,
        status: "measured".into(),
        rounds: 0,
        k_initial: model.k(),
        k_final: model.k(),
        initial_average_consistency: avg,
        average_consistency: avg,
        themes: (0..themed.k()).map(|j| themed.theme_name(j)).collect(),
    };
    Ok((themed, s))
}

