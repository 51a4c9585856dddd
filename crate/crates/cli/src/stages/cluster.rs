use serde_json::json;
use vistheme_core::cluster::{kmeans_restarts, select_k, silhouette, KMeansParams, KSearchResult};
use vistheme_core::util::write_json_atomic;

use super::{write_csv, Ctx, CLUSTER, EMBED};
use crate::error::invalid_config;
use crate::manifest::hash_inputs;

pub fn run(ctx: &mut Ctx, fixed_k: Option<usize>) -> anyhow::Result<()> {
    ctx.require(EMBED, CLUSTER)?;
    let inputs = hash_inputs(&[("embeddings", &ctx.layout.embeddings())])?;
    let search = ctx.config.k_search();
    let params = json!({"search": search, "k": fixed_k});
    if ctx.up_to_date(CLUSTER, &inputs, &params) {
        return Ok(());
    }
    let matrix = ctx.embeddings()?;
    let (table, model) = match fixed_k {
        Some(k) => {
            if k < 2 || k > matrix.n() {
                return Err(invalid_config(format!("--k must lie in 2..={}, got {k}", matrix.n())));
            }
            let km = KMeansParams { k, seed: search.seed, max_iter: search.max_iter, tol: search.tol };
            let mut model = kmeans_restarts(&matrix, &km, search.restarts)?;
            model.silhouette = silhouette(&matrix, &model).ok();
            (None, model)
        }
        None => {
            let mut search = search;
            if search.k_max > matrix.n() {
                log::warn!("k_max {} exceeds {} images; clamping", search.k_max, matrix.n());
                search.k_max = matrix.n();
            }
            if search.k_min > search.k_max {
                return Err(invalid_config(format!("too few images ({}) for k_min {}", matrix.n(), search.k_min)));
            }
            let (table, model) = select_k(&matrix, &search)?;
            (Some(table), model)
        }
    };
    let dir = ctx.layout.cluster_dir();
    let model_dir = ctx.cluster_model_dir();
    model.save(&model_dir)?;
    let k_search = dir.join("k_search.json");
    let table = table.unwrap_or_else(|| KSearchResult { candidates: Vec::new(), chosen_k: model.k() });
    write_json_atomic(&k_search, &table)?;
    let assignments = dir.join("assignments.csv");
    write_csv(
        &assignments,
        &["image_id", "cluster"],
        model.ids().iter().zip(model.labels()).map(|(id, l)| [id.clone(), l.to_string()]),
    )?;
    println!(
        "cluster: k = {} (silhouette {}), sizes {:?}",
        model.k(),
        model.silhouette.map_or("n/a".into(), |s| format!("{s:.4}")),
        model.sizes()
    );
    let outputs = [model_dir.join("model.json"), model_dir.join("centroids.cemb"), k_search, assignments];
    ctx.finish(CLUSTER, inputs, params, &outputs)
}
