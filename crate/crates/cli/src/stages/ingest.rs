use std::path::Path;

use serde_json::json;

use super::{Ctx, INGEST};
use crate::manifest::hash_inputs;

pub fn run(ctx: &mut Ctx, input: &Path) -> anyhow::Result<()> {
    let inputs = hash_inputs(&[("posts", input)])?;
    let params = json!({});
    if ctx.up_to_date(INGEST, &inputs, &params) {
        return Ok(());
    }
    let store = ctx.layout.corpus_store();
    let report = store.ingest(input)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    for r in &report.rejects {
        log::warn!("line {}: {}", r.line, r.reason);
    }
    let s = &report.summary;
    println!(
        "ingest: {} posts ({} original), {} images ({} static), {} rejected",
        s.n_posts,
        s.n_original_posts,
        s.n_images,
        s.n_static_images,
        report.rejects.len()
    );
    let outputs = [store.posts_path(), store.index_path(), store.rejects_path()];
    ctx.finish(INGEST, inputs, params, &outputs)
}
