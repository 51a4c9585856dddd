use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::json;
use vistheme_core::textmodel::{evaluate_keyed, ingest_predictions, NaiveBayes, Task};
use vistheme_core::util::write_json_atomic;

use super::{analysis_posts, classify_stage, read_pairs, write_csv, Ctx, INGEST};
use crate::manifest::hash_inputs;

pub enum Source<'a> {
    Predictions(&'a Path),
    /// Train the baseline on `post_id,label` rows and label every post.
    Train(&'a Path),
}

pub fn run(ctx: &mut Ctx, task: Task, source: Source<'_>, gold: Option<&Path>) -> anyhow::Result<()> {
    let stage = classify_stage(task);
    ctx.require(INGEST, &stage)?;
    let posts_path = ctx.layout.corpus_store().posts_path();
    let mut named: Vec<(&str, &Path)> = vec![("posts", &posts_path)];
    let mode = match source {
        Source::Predictions(p) => {
            named.push(("predictions", p));
            "predictions"
        }
        Source::Train(p) => {
            named.push(("train", p));
            "train"
        }
    };
    if let Some(g) = gold {
        named.push(("gold", g));
    }
    let inputs = hash_inputs(&named)?;
    let params = json!({"mode": mode, "classify": ctx.config.classify});
    if ctx.up_to_date(&stage, &inputs, &params) {
        return Ok(());
    }
    ctx.manifest.mark_incomplete(&stage);

    let corpus = ctx.corpus()?;
    let expected = analysis_posts(&corpus);
    let dir = ctx.layout.classify_dir().join(task.as_str());
    let mut outputs: Vec<PathBuf> = Vec::new();
    let labels = match source {
        Source::Predictions(p) => {
            let file = std::fs::File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            let set = ingest_predictions(file, task, &expected)?;
            for r in &set.rejects {
                log::warn!("{}: line {}: {}", p.display(), r.line, r.reason);
            }
            let coverage = dir.join("coverage.json");
            write_json_atomic(
                &coverage,
                &json!({
                    "task": task.as_str(),
                    "coverage": set.coverage,
                    "unknown_posts": set.unknown_posts.len(),
                    "rejects": set.rejects,
                }),
            )?;
            outputs.push(coverage);
            println!(
                "classify {}: coverage {}/{} ({:.3}), {} rejected row(s), {} unknown post(s)",
                task.as_str(),
                set.coverage.n_labeled,
                set.coverage.n_posts,
                set.coverage.coverage,
                set.rejects.len(),
                set.unknown_posts.len()
            );
            set.labels
        }
        Source::Train(p) => {
            let rows = read_pairs(p, ["post_id", "label"])?;
            let mut examples = Vec::with_capacity(rows.len());
            for (id, label) in &rows {
                let post = corpus.post(id).with_context(|| format!("{}: unknown post {id:?}", p.display()))?;
                examples.push((post.text.as_str(), label.as_str()));
            }
            let model = NaiveBayes::train(task, &examples, ctx.config.classify.clone())?;
            let model_dir = dir.join("model");
            model.save(&model_dir)?;
            outputs.push(model_dir.join(vistheme_core::textmodel::CLASSIFIER_FILE));
            outputs.push(model_dir.join(vistheme_core::textmodel::WEIGHTS_FILE));
            println!(
                "classify {}: trained on {} posts, {} features",
                task.as_str(),
                examples.len(),
                model.n_features()
            );
            expected
                .iter()
                .map(|id| {
                    let post = corpus.post(id).expect("analysis post");
                    (id.clone(), model.predict(&post.text).to_string())
                })
                .collect()
        }
    };
    if let Some(g) = gold {
        let gold = read_pairs(g, ["post_id", "label"])?;
        let preds = labels.iter().filter(|(id, _)| gold.contains_key(*id)).map(|(a, b)| (a.clone(), b.clone())).collect();
        let report = evaluate_keyed(task, &preds, &gold)?;
        let eval = dir.join("eval.json");
        write_json_atomic(&eval, &report)?;
        outputs.push(eval);
        println!("classify {}: micro-F1 {:.4}, macro-F1 {:.4} on {} posts", task.as_str(), report.micro_f1, report.macro_f1, report.n);
    }
    let labels_path = ctx.labels_path(task);
    write_csv(&labels_path, &["post_id", "label"], labels.into_iter().map(|(a, b)| [a, b]))?;
    outputs.push(labels_path);
    ctx.finish(&stage, inputs, params, &outputs)
}
