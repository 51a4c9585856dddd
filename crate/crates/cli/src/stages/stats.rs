use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use vistheme_core::corpus::{Corpus, Engagement};
use vistheme_core::refine::RoundRecord;
use vistheme_core::stats::{chi_square, cross_tabulate, one_way_anova, ChiSquareOptions, ContingencyTable};
use vistheme_core::textmodel::Task;
use vistheme_core::util::write_json_atomic;
use vistheme_core::Anova;

use super::{analysis_set, classify_stage, read_labels, read_post_types, Ctx, REFINE, STATS};
use crate::manifest::hash_inputs;

/// Everything the report stage formats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsResults {
    pub image_types: Vec<String>,
    pub info_table: Option<ContingencyTable>,
    pub emotion_table: Option<ContingencyTable>,
    pub tests: Value,
}

pub fn results_path(ctx: &Ctx) -> std::path::PathBuf {
    ctx.root().join("stats").join("results.json")
}

pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    ctx.require(REFINE, STATS)?;
    for task in [Task::Info, Task::Emotion] {
        ctx.require(&classify_stage(task), STATS)?;
    }
    let posts = ctx.layout.corpus_store().posts_path();
    let model = ctx.layout.refined_model_dir().join("model.json");
    let types = ctx.post_types_path();
    let info = ctx.labels_path(Task::Info);
    let emotion = ctx.labels_path(Task::Emotion);
    let rounds = ctx.layout.refine_dir().join("rounds.json");
    let mut named = vec![("posts", &posts), ("model", &model), ("post_types", &types), ("info", &info), ("emotion", &emotion)];
    if rounds.exists() {
        named.push(("rounds", &rounds));
    }
    let inputs = hash_inputs(&named.iter().map(|(n, p)| (*n, p.as_path())).collect::<Vec<_>>())?;
    let opts = ChiSquareOptions { yates: ctx.config.report.yates };
    let params = json!({"yates": opts.yates});
    if ctx.up_to_date(STATS, &inputs, &params) {
        return Ok(());
    }

    let corpus = ctx.corpus()?;
    let model = ctx.refined_model()?;
    let post_types = read_post_types(ctx)?;
    let mut image_types: Vec<String> = Vec::new();
    for j in 0..model.k() {
        let name = model.theme_name(j);
        if !image_types.contains(&name) {
            image_types.push(name);
        }
    }
    let posts = analysis_set(&corpus).post_ids;

    let mut tests = serde_json::Map::new();
    let mut tables = BTreeMap::new();
    for task in [Task::Info, Task::Emotion] {
        let labels = read_labels(ctx, task)?;
        let order: Vec<String> = task.labels().iter().map(|s| s.to_string()).collect();
        let pairs = posts
            .iter()
            .filter(|p| post_types.contains_key(*p))
            .map(|p| (post_types.get(p).cloned(), labels.get(p).cloned()));
        let table = cross_tabulate(pairs, &image_types, &order).ok();
        let result = match &table {
            Some(t) => outcome(chi_square::<f64>(t, opts)),
            None => json!({"error": "no posts carry both an image type and a label"}),
        };
        tests.insert(format!("chi_square_{}_by_image_type", task.as_str()), result);
        tables.insert(task.as_str(), table);
    }

    let mut by_theme = serde_json::Map::new();
    let mut by_presence = serde_json::Map::new();
    for index in Engagement::ALL {
        let mut groups: Vec<Vec<f64>> = vec![Vec::new(); image_types.len()];
        for p in &posts {
            if let Some(t) = post_types.get(p) {
                let g = image_types.iter().position(|x| x == t).expect("image type from the model");
                groups[g].push(value(&corpus, p, index));
            }
        }
        let groups: Vec<Vec<f64>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
        by_theme.insert(index.as_str().into(), anova(&groups));
        let (with, without): (Vec<&String>, Vec<&String>) =
            posts.iter().partition(|p| corpus.post(p).is_some_and(|x| !x.image_ids.is_empty()));
        let presence = [with, without].map(|g| g.iter().map(|p| value(&corpus, p, index)).collect::<Vec<_>>());
        by_presence.insert(index.as_str().into(), anova(&presence));
    }
    tests.insert("anova_engagement_by_image_type".into(), Value::Object(by_theme));
    tests.insert("anova_engagement_by_image_presence".into(), Value::Object(by_presence));

    if rounds.exists() {
        let history: Vec<RoundRecord> = serde_json::from_slice(&std::fs::read(&rounds)?)?;
        tests.insert(
            "coder_kappa_by_round".into(),
            json!(history.iter().map(|r| json!({"round": r.round, "kappa": r.kappa})).collect::<Vec<_>>()),
        );
    }

    let results = StatsResults {
        image_types,
        info_table: tables.remove("info").flatten(),
        emotion_table: tables.remove("emotion").flatten(),
        tests: Value::Object(tests),
    };
    let path = results_path(ctx);
    write_json_atomic(&path, &results)?;
    println!("stats: {} test(s) written to {}", results.tests.as_object().map_or(0, |m| m.len()), path.display());
    ctx.finish(STATS, inputs, params, &[path])
}

fn value(corpus: &Corpus, post: &str, index: Engagement) -> f64 {
    corpus.post(post).map_or(0.0, |p| index.of(p) as f64)
}

fn anova(groups: &[Vec<f64>]) -> Value {
    let res: Result<Anova, _> = one_way_anova(groups);
    outcome(res.map(|a| {
        json!({"f": finite(a.f), "df_between": a.df_between, "df_within": a.df_within,
               "p_value": a.p_value, "degenerate": a.degenerate,
               "group_sizes": groups.iter().map(Vec::len).collect::<Vec<_>>()})
    }))
}

/// JSON has no infinity; a degenerate F is written as null.
fn finite(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { Value::Null }
}

fn outcome<T: Serialize, E: std::fmt::Display>(r: Result<T, E>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({"error": e.to_string()}),
    }
}

