use std::path::PathBuf;

use chrono::FixedOffset;
use serde_json::json;
use vistheme_core::corpus::{engagement_summary, EngagementRow, Grouping};
use vistheme_core::stats::{temporal_series, ContingencyTable};
use vistheme_core::textmodel::Task;

use super::refine::{summary_path, RefineSummary};
use super::stats::{results_path, StatsResults};
use super::{analysis_set, read_labels, write_csv, write_text, Ctx, REPORT, STATS};
use crate::error::invalid_config;
use crate::manifest::hash_inputs;

pub const CONSISTENCY_HEADER: [&str; 7] = [
    "backend",
    "method",
    "split_merge",
    "rounds",
    "k_final",
    "initial_average_consistency",
    "average_consistency",
];

pub fn consistency_row(s: &RefineSummary) -> [String; 7] {
    [
        s.backend.clone(),
        s.method.clone(),
        s.split_merge.to_string(),
        s.rounds.to_string(),
        s.k_final.to_string(),
        format!("{:.6}", s.initial_average_consistency),
        format!("{:.6}", s.average_consistency),
    ]
}

pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    ctx.require(STATS, REPORT)?;
    let results = results_path(ctx);
    let summary = summary_path(ctx.root());
    let posts = ctx.layout.corpus_store().posts_path();
    let model = ctx.layout.refined_model_dir().join("model.json");
    let info = ctx.labels_path(Task::Info);
    let inputs = hash_inputs(&[
        ("stats", &results),
        ("refine_summary", &summary),
        ("posts", &posts),
        ("model", &model),
        ("info", &info),
    ])?;
    let hours = ctx.config.report.utc_offset_hours;
    let params = json!({"utc_offset_hours": hours});
    if ctx.up_to_date(REPORT, &inputs, &params) {
        return Ok(());
    }
    let offset = FixedOffset::east_opt(hours * 3600)
        .ok_or_else(|| invalid_config(format!("utc_offset_hours {hours} out of range")))?;

    let stats: StatsResults = serde_json::from_slice(&std::fs::read(&results)?)?;
    let refine: RefineSummary = serde_json::from_slice(&std::fs::read(&summary)?)?;
    let corpus = ctx.corpus()?;
    let model = ctx.refined_model()?;
    let set = analysis_set(&corpus);
    let dir = ctx.layout.report_dir();
    let mut outputs: Vec<PathBuf> = Vec::new();

    let mut rows: Vec<(&str, EngagementRow)> = Vec::new();
    for (name, grouping) in [("image_presence", Grouping::ImagePresence), ("image_type", Grouping::ByVisualTheme(&model))] {
        rows.extend(engagement_summary(&corpus, &set.post_ids, &grouping)?.into_iter().map(|r| (name, r)));
    }
    let engagement = dir.join("engagement.csv");
    write_csv(
        &engagement,
        &["grouping", "group", "index", "n", "mean", "sd"],
        rows.into_iter().map(|(g, r)| {
            [g.to_string(), r.group, r.index.as_str().to_string(), r.n.to_string(), format!("{:.6}", r.mean), format!("{:.6}", r.sd)]
        }),
    )?;
    outputs.push(engagement);

    for (file, table, labels) in [
        ("info_by_image_type.csv", &stats.info_table, Task::Info.labels()),
        ("emotion_by_image_type.csv", &stats.emotion_table, Task::Emotion.labels()),
    ] {
        let table = match table {
            Some(t) => t.clone(),
            None => ContingencyTable::new(Vec::new(), labels.iter().map(|s| s.to_string()).collect(), Vec::new())?,
        };
        let path = dir.join(file);
        write_text(&path, &table.to_row_percent_csv("image_type"))?;
        outputs.push(path);
    }

    let info_labels = read_labels(ctx, Task::Info)?;
    let categories: Vec<String> = Task::Info.labels().iter().map(|s| s.to_string()).collect();
    let series = temporal_series(
        set.post_ids.iter().filter_map(|id| corpus.post(id)).map(|p| (p.created_at, info_labels.get(&p.post_id).cloned())),
        offset,
        Some(&categories),
    )?;
    let temporal = dir.join("temporal.csv");
    write_text(&temporal, &series.to_csv())?;
    outputs.push(temporal);

    let tests = dir.join("tests.json");
    vistheme_core::util::write_json_atomic(&tests, &stats.tests)?;
    outputs.push(tests);

    let consistency = dir.join("consistency.csv");
    write_csv(&consistency, &CONSISTENCY_HEADER, [consistency_row(&refine)])?;
    outputs.push(consistency);

    println!("report: {} file(s) in {}", outputs.len(), dir.display());
    ctx.finish(REPORT, inputs, params, &outputs)
}
