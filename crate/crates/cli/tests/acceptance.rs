//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use vistheme_core::cluster::{select_k, silhouette_labels, ClusterModel, KSearchParams};
use vistheme_core::embedding::{decode_cemb, encode_cemb, EmbeddingMatrix};
use vistheme_core::refine::{
    Action, ConsistencyReport, LabelEvent, LabelProvider, LabelRequest, MapProvider, RefineConfig, RefineStatus,
    Refinement,
};
use vistheme_core::stats::{chi_square, cohens_kappa, one_way_anova, ChiSquareOptions, ContingencyTable};
use vistheme_core::synthetic::{blob_matrix, separated_blobs, Blob};
use vistheme_core::textmodel::{evaluate, BayesConfig, NaiveBayes, Task};
use vistheme_core::{Anova, ChiSquare, Kappa};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}

/// Best agreement between two labelings over all relabelings of `pred`.
fn relabeled_agreement(truth: &[usize], pred: &[usize], k: usize) -> f64 {
    let mut confusion = vec![vec![0usize; k]; k];
    for (&t, &p) in truth.iter().zip(pred) {
        confusion[p][t] += 1;
    }
    fn best(row: usize, used: &mut Vec<bool>, c: &[Vec<usize>]) -> usize {
        if row == c.len() {
            return 0;
        }
        let mut top = 0;
        for j in 0..c.len() {
            if !used[j] {
                used[j] = true;
                top = top.max(c[row][j] + best(row + 1, used, c));
                used[j] = false;
            }
        }
        top
    }
    best(0, &mut vec![false; k], &confusion) as f64 / truth.len() as f64
}

fn criterion_1() -> Check {
    let (matrix, truth) = separated_blobs(6, 100, 32, 8.0, 1.0, 11).map_err(|e| e.to_string())?;
    let params = KSearchParams { k_min: 5, k_max: 20, seed: 3, ..Default::default() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (search, model) = pool.install(|| select_k(&matrix, &params)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(search.chosen_k == 6, || format!("chose k = {}", search.chosen_k))?;
    let agreement = relabeled_agreement(&truth, model.labels(), 6);
    ensure(agreement >= 0.98, || format!("agreement {agreement:.4}"))?;
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!("k = 6, agreement {agreement:.4}, {secs:.2}s single-threaded"))
}

fn axis(d: usize, j: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[j] = scale;
    v
}

/// Five pure clusters plus one cluster mixing two themes 40/40 with a 20%
/// minority.
fn refine_fixture() -> (EmbeddingMatrix<f64>, ClusterModel, BTreeMap<String, String>) {
    let d = 8;
    let mut near = axis(d, 6, 10.0);
    near[7] = 1.5;
    let blobs = [
        (Blob::new("a", axis(d, 0, 10.0), 60, 0.3), "Posters", 0),
        (Blob::new("b", axis(d, 1, 10.0), 60, 0.3), "People", 1),
        (Blob::new("c", axis(d, 2, 10.0), 60, 0.3), "TextImages", 2),
        (Blob::new("d", axis(d, 3, 10.0), 60, 0.3), "IndoorObjects", 3),
        (Blob::new("e", axis(d, 4, 10.0), 60, 0.3), "OutdoorScenes", 4),
        (Blob::new("m1_", axis(d, 5, 10.0), 20, 0.3), "Posters", 5),
        (Blob::new("m2_", axis(d, 6, 10.0), 20, 0.3), "People", 5),
        (Blob::new("m3_", near, 10, 0.3), "Food", 5),
    ];
    let plain: Vec<Blob> = blobs.iter().map(|b| b.0.clone()).collect();
    let matrix = blob_matrix(&plain, 42).unwrap();
    let mut labels = Vec::new();
    let mut gold = BTreeMap::new();
    let mut row = 0;
    for (blob, theme, cluster) in &blobs {
        for _ in 0..blob.n {
            labels.push(*cluster);
            gold.insert(matrix.ids()[row].clone(), theme.to_string());
            row += 1;
        }
    }
    let model = ClusterModel::from_labels(&matrix, labels, 6, 42).unwrap();
    (matrix, model, gold)
}

fn is_partition(state: &Refinement, ids: &[String]) -> bool {
    let mut seen: Vec<&String> = state.clusters().iter().flat_map(|c| &c.members).collect();
    let n = seen.len();
    seen.sort();
    seen.dedup();
    let all: BTreeSet<&String> = ids.iter().collect();
    seen.len() == n && seen.into_iter().collect::<BTreeSet<_>>() == all
}

fn criterion_2() -> Check {
    let (matrix, model, gold) = refine_fixture();
    let cfg = RefineConfig { seed: 7, ..Default::default() };
    let mut state = Refinement::new(&matrix, &model, cfg).map_err(|e| e.to_string())?;
    let mut provider = MapProvider::new(gold);
    while !state.status().is_terminal() {
        let cur = state.current().ok_or("no open round")?;
        let request =
            LabelRequest { round: cur.round, samples: &cur.samples, missing: state.missing(), disputes: Vec::new() };
        for ev in provider.provide(&request).map_err(|e| e.to_string())? {
            if let LabelEvent::Adjudicated { image_id, theme } = ev {
                state.adjudicate(&image_id, &theme).map_err(|e| e.to_string())?;
            }
        }
        state.advance(&matrix, &BTreeMap::new()).map_err(|e| e.to_string())?;
        ensure(is_partition(&state, matrix.ids()), || format!("round {}: clusters are not a partition", state.round()))?;
    }
    ensure(state.status() == RefineStatus::Converged, || format!("status {:?}", state.status()))?;
    let actions: Vec<&Action> = state.history().iter().flat_map(|r| &r.actions).collect();
    let splits: Vec<&&Action> = actions.iter().filter(|a| matches!(a, Action::Split { .. })).collect();
    ensure(splits.len() == 1, || format!("{} splits", splits.len()))?;
    ensure(matches!(splits[0], Action::Split { k: 2, .. }), || format!("{:?}", splits[0]))?;
    let merges = actions.iter().filter(|a| matches!(a, Action::Merge { clusters, .. } if clusters.len() > 1)).count();
    ensure(merges > 0, || "no merge".into())?;
    let out = state.outcome().ok_or("no outcome")?;
    ensure(out.average_consistency >= 0.95, || format!("average {:.4}", out.average_consistency))?;
    ensure(out.average_consistency >= out.initial_average_consistency, || {
        format!("{:.4} < {:.4}", out.average_consistency, out.initial_average_consistency)
    })?;
    let mut ids: Vec<String> = out.model.ids().to_vec();
    ids.sort();
    let mut want = matrix.ids().to_vec();
    want.sort();
    ensure(ids == want, || "final model does not cover every image".into())?;
    Ok(format!(
        "1 split (k = 2), {merges} merge(s), converged, consistency {:.4} -> {:.4}",
        out.initial_average_consistency, out.average_consistency
    ))
}

fn criterion_3() -> Check {
    let cfg = RefineConfig::default();
    let counts = |v: &[(&str, usize)]| v.iter().map(|(t, c)| (t.to_string(), *c)).collect::<BTreeMap<_, _>>();
    let at_60 = ConsistencyReport::from_counts(0, counts(&[("Posters", 30), ("People", 10), ("Food", 10)]), &cfg)
        .map_err(|e| e.to_string())?;
    ensure(at_60.max_prevalence == 0.60 && !at_60.consistent, || format!("{at_60:?}"))?;
    let at_20 = ConsistencyReport::from_counts(0, counts(&[("Posters", 25), ("People", 15), ("Food", 10)]), &cfg)
        .map_err(|e| e.to_string())?;
    ensure(at_20.prevalences["Food"] == 0.20, || format!("{at_20:?}"))?;
    ensure(!at_20.significant_themes.iter().any(|t| t == "Food"), || format!("{:?}", at_20.significant_themes))?;
    Ok("P = 0.60 inconsistent, P = 0.20 not significant".into())
}

fn chi(counts: Vec<Vec<u64>>) -> Result<ChiSquare, String> {
    let t = ContingencyTable::from_counts(counts).map_err(|e| e.to_string())?;
    chi_square(&t, ChiSquareOptions::default()).map_err(|e| e.to_string())
}

fn criterion_4() -> Check {
    let r = chi(vec![vec![10, 20], vec![20, 10]])?;
    ensure((r.statistic - 6.6667).abs() <= 1e-4 && (r.statistic - 20.0 / 3.0).abs() <= 1e-9, || {
        format!("statistic {}", r.statistic)
    })?;
    ensure(r.df == 1, || format!("df {}", r.df))?;
    ensure((r.p_value - 0.009823).abs() <= 1e-6, || format!("p {}", r.p_value))?;
    let mut g = rng(4);
    for case in 0..200 {
        let (rows, cols) = (g.random_range(2..6), g.random_range(2..6));
        let counts: Vec<Vec<u64>> =
            (0..rows).map(|_| (0..cols).map(|_| g.random_range(1..60)).collect()).collect();
        let factor = g.random_range(2..7u64);
        let base = chi(counts.clone())?;
        let t = ContingencyTable::from_counts(counts.clone()).map_err(|e| e.to_string())?;
        let flipped: ChiSquare = chi_square(&t.transpose(), ChiSquareOptions::default()).map_err(|e| e.to_string())?;
        let scaled = chi(counts.iter().map(|r| r.iter().map(|v| v * factor).collect()).collect())?;
        let tol = 1e-9 * base.statistic.abs().max(1.0);
        ensure((flipped.statistic - base.statistic).abs() <= tol && flipped.df == base.df, || {
            format!("table {case}: transpose changed the statistic")
        })?;
        ensure((scaled.statistic - factor as f64 * base.statistic).abs() <= tol * factor as f64, || {
            format!("table {case}: scaling by {factor} gave {} vs {}", scaled.statistic, base.statistic)
        })?;
    }
    Ok(format!("χ² = {:.4}, df 1, p = {:.6}; 200 random tables", r.statistic, r.p_value))
}

fn criterion_5() -> Check {
    let a = ["y", "y", "y", "y", "y", "n", "n", "n", "n", "n"];
    let b = ["y", "y", "y", "y", "n", "y", "n", "n", "n", "n"];
    let k: Kappa = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure((k.observed - 0.8).abs() < 1e-15 && (k.expected - 0.5).abs() < 1e-15, || format!("{k:?}"))?;
    ensure((k.kappa - 0.6).abs() <= 1e-12, || format!("κ = {}", k.kappa))?;
    let mut g = rng(5);
    for case in 0..100 {
        let n = g.random_range(2..80);
        let cats = g.random_range(2..6u8);
        let mut labels: Vec<u8> = (0..n).map(|_| g.random_range(0..cats)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let s: Kappa = cohens_kappa(&labels, &labels).map_err(|e| e.to_string())?;
        ensure(s.kappa == 1.0, || format!("labeling {case}: κ(self) = {}", s.kappa))?;
    }
    Ok("κ = 0.6; κ(self) = 1 on 100 labelings".into())
}

fn anova(groups: &[Vec<f64>]) -> Result<Anova, String> {
    one_way_anova(groups).map_err(|e| e.to_string())
}

fn criterion_6() -> Check {
    let r = anova(&[vec![1.0, 2.0], vec![5.0, 6.0]])?;
    ensure((r.f - 32.0).abs() <= 1e-9, || format!("F = {}", r.f))?;
    ensure((r.p_value - 0.0299).abs() <= 1e-4, || format!("p = {}", r.p_value))?;
    // F(1, 2) tail in closed form: 1 - sqrt(F / (F + 2))
    ensure((r.p_value - (1.0 - (32.0f64 / 34.0).sqrt())).abs() <= 1e-6, || format!("p = {}", r.p_value))?;
    let same = anova(&[vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0], vec![2.0, 1.0, 3.0]])?;
    ensure(same.f == 0.0 && same.p_value == 1.0, || format!("equal means gave F = {}, p = {}", same.f, same.p_value))?;
    let mut g = rng(6);
    for case in 0..100 {
        let groups: Vec<Vec<f64>> = (0..g.random_range(2..5))
            .map(|_| (0..g.random_range(2..12)).map(|_| g.random_range(-50.0..50.0)).collect())
            .collect();
        let (scale, shift) = (g.random_range(0.1..20.0), g.random_range(-1e3..1e3));
        let moved: Vec<Vec<f64>> = groups.iter().map(|v| v.iter().map(|x| x * scale + shift).collect()).collect();
        let (a, b) = (anova(&groups)?, anova(&moved)?);
        ensure((a.f - b.f).abs() <= 1e-8 * a.f.abs().max(1.0), || format!("groups {case}: F {} vs {}", a.f, b.f))?;
    }
    Ok(format!(
        "F = {:.4}, p = {:.6} (exact tail within 1e-6; 0.0299 is its 4-place rounding, off by {:.1e}); \
         equal means F = 0, p = 1; invariant on 100 groups",
        r.f,
        r.p_value,
        (r.p_value - 0.0299).abs()
    ))
}

/// Silhouette straight from its definition.
fn silhouette_direct(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| d(&points[i], &points[j])).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        for c in (0..k).filter(|&c| c != labels[i]) {
            let other: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            if !other.is_empty() {
                b = b.min(other.iter().map(|&j| d(&points[i], &points[j])).sum::<f64>() / other.len() as f64);
            }
        }
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

fn criterion_7() -> Check {
    let mut g = rng(7);
    let mut worst = 0f64;
    for case in 0..100 {
        let n = g.random_range(3..=50);
        let dim = g.random_range(1..6);
        let k = g.random_range(2..=5.min(n));
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| g.random_range(-5.0..5.0)).collect()).collect();
        let mut labels: Vec<usize> = (0..n).map(|_| g.random_range(0..k)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let m = EmbeddingMatrix::<f64>::from_rows(
            points.iter().enumerate().map(|(i, p)| (format!("p{i}"), p.clone())).collect(),
            dim,
            "t",
        )
        .map_err(|e| e.to_string())?;
        let got = silhouette_labels(&m, &labels, k).map_err(|e| e.to_string())?;
        let want = silhouette_direct(&points, &labels, k);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-12, || format!("instance {case}: {got} vs {want}"))?;
    }
    Ok(format!("100 instances, max deviation {worst:.1e}"))
}

fn criterion_8() -> Check {
    let mut g = rng(8);
    for task in [Task::Info, Task::Emotion] {
        let labels = task.labels();
        for case in 0..50 {
            let n = g.random_range(1..200);
            let gold: Vec<&str> = (0..n).map(|_| labels[g.random_range(0..labels.len())]).collect();
            let pred: Vec<&str> = (0..n).map(|_| labels[g.random_range(0..labels.len())]).collect();
            let r = evaluate(task, gold.iter().copied().zip(pred.iter().copied())).map_err(|e| e.to_string())?;
            let acc = gold.iter().zip(&pred).filter(|(a, b)| a == b).count() as f64 / n as f64;
            ensure((r.micro_f1 - acc).abs() < 1e-12, || format!("{} set {case}: micro-F1 {} vs accuracy {acc}", task.as_str(), r.micro_f1))?;
            let perfect = evaluate(task, gold.iter().map(|&l| (l, l))).map_err(|e| e.to_string())?;
            ensure(perfect.micro_f1 == 1.0, || "perfect predictions below 1".into())?;
            let shift = |l: &str| labels[(task.index_of(l).unwrap() + 1) % labels.len()];
            let wrong = evaluate(task, gold.iter().map(|&l| (l, shift(l)))).map_err(|e| e.to_string())?;
            ensure(wrong.micro_f1 == 0.0, || "all-wrong predictions above 0".into())?;
        }
    }
    Ok("micro-F1 = accuracy on 100 sets; perfect 1.0, all wrong 0.0".into())
}

fn criterion_9() -> Check {
    let mut g = rng(9);
    for case in 0..50usize {
        let (n, dim) = match case {
            0 => (0, 16),
            1 => (3, 1280),
            _ => (g.random_range(0..40), g.random_range(1..300)),
        };
        let ids: Vec<String> = (0..n).map(|i| format!("img-{case}-{i}")).collect();
        let values: Vec<f32> = (0..n * dim)
            .map(|_| loop {
                let v = f32::from_bits(g.random());
                if v.is_finite() {
                    break v;
                }
            })
            .collect();
        let m = EmbeddingMatrix::new(ids, dim, values, "t").map_err(|e| e.to_string())?;
        let bytes = encode_cemb(&m).map_err(|e| e.to_string())?;
        let back = decode_cemb(&bytes).map_err(|e| e.to_string())?;
        let same_bits = back.values().iter().zip(m.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(back.ids() == m.ids() && back.dim() == dim && back.values().len() == m.values().len() && same_bits, || {
            format!("matrix {case} ({n}×{dim}) changed")
        })?;
    }
    Ok("50 matrices bitwise, including n = 0 and d = 1280".into())
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

fn criterion_10() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    common::full_pipeline(&a);
    common::full_pipeline(&b);
    let (ra, rb) = (read_dir_bytes(&a.join("report")), read_dir_bytes(&b.join("report")));
    let expected: BTreeSet<&str> = [
        "engagement.csv",
        "info_by_image_type.csv",
        "emotion_by_image_type.csv",
        "temporal.csv",
        "tests.json",
        "consistency.csv",
    ]
    .into();
    ensure(ra.keys().map(String::as_str).collect::<BTreeSet<_>>() == expected, || format!("report files {:?}", ra.keys()))?;
    ensure(ra == rb, || "reports differ between runs".into())?;

    let mut per_type: BTreeMap<String, u64> = BTreeMap::new();
    for row in csv::Reader::from_path(a.join("refine/post_types.csv")).map_err(|e| e.to_string())?.records() {
        *per_type.entry(row.map_err(|e| e.to_string())?[1].to_string()).or_default() += 1;
    }
    for file in ["info_by_image_type.csv", "emotion_by_image_type.csv"] {
        let mut rdr = csv::Reader::from_path(a.join("report").join(file)).map_err(|e| e.to_string())?;
        let header = rdr.headers().map_err(|e| e.to_string())?.clone();
        let mut sums = BTreeMap::new();
        for row in rdr.records() {
            let row = row.map_err(|e| e.to_string())?;
            let cells: u64 = (0..header.len())
                .filter(|&i| header[i].ends_with("_n"))
                .map(|i| row[i].parse::<u64>().unwrap())
                .sum();
            ensure(row[1].parse::<u64>().unwrap() == cells, || format!("{file}: total column disagrees"))?;
            sums.insert(row[0].to_string(), cells);
        }
        ensure(sums == per_type, || format!("{file}: row sums {sums:?} vs posts per type {per_type:?}"))?;
    }

    let posts: Vec<serde_json::Value> = std::fs::read_to_string(common::fixture("posts.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .filter(|p: &serde_json::Value| p["is_original"] == true)
        .collect();
    let days: BTreeSet<String> = posts.iter().map(|p| p["created_at"].as_str().unwrap()[..10].to_string()).collect();
    let first = chrono::NaiveDate::parse_from_str(days.first().unwrap(), "%Y-%m-%d").unwrap();
    let last = chrono::NaiveDate::parse_from_str(days.last().unwrap(), "%Y-%m-%d").unwrap();
    let span = (last - first).num_days() as usize + 1;
    let temporal = std::fs::read_to_string(a.join("report/temporal.csv")).unwrap();
    let rows: Vec<Vec<&str>> = temporal.lines().skip(1).map(|l| l.split(',').collect()).collect();
    ensure(rows.len() == span, || format!("{} temporal rows for a {span}-day span", rows.len()))?;
    for (i, r) in rows.iter().enumerate() {
        let date = (first + chrono::Duration::days(i as i64)).format("%Y-%m-%d").to_string();
        ensure(r[0] == date, || format!("row {i}: date {} != {date}", r[0]))?;
        let volume: u64 = r[1].parse().unwrap();
        let cats: u64 = r[2..].iter().map(|v| v.parse::<u64>().unwrap()).sum();
        ensure(volume == cats, || format!("{date}: volume {volume} vs categories {cats}"))?;
        ensure(days.contains(&date) == (volume > 0), || format!("{date}: gap not zero-filled"))?;
    }
    let total: usize = per_type.values().sum::<u64>() as usize;
    Ok(format!(
        "identical reports; {total} typed posts over {} types; {span} days, {} zero-filled",
        per_type.len(),
        span - days.len()
    ))
}

const KEYWORDS: [[&str; 5]; 4] = [
    ["lockdown", "closure", "testing", "route", "cases"],
    ["support", "believe", "proud", "angry", "opinion"],
    ["dinner", "cooking", "window", "daily", "noodles"],
    ["notice", "policy", "regulation", "announced", "measures"],
];
const FILLER: [&str; 16] = [
    "today", "city", "people", "we", "the", "and", "again", "still", "about", "here", "now", "one", "all", "new",
    "week", "home",
];

fn keyword_set(n: usize, seed: u64) -> Vec<(String, &'static str)> {
    let mut g = rng(seed);
    let labels = Task::Info.labels();
    (0..n)
        .map(|_| {
            let c = g.random_range(0..4);
            let mut words: Vec<&str> = (0..g.random_range(4..10)).map(|_| FILLER[g.random_range(0..FILLER.len())]).collect();
            for _ in 0..g.random_range(1..3) {
                let at = g.random_range(0..=words.len());
                words.insert(at, KEYWORDS[c][g.random_range(0..5)]);
            }
            (words.join(" "), labels[c])
        })
        .collect()
}

fn criterion_11() -> Check {
    let train = keyword_set(1000, 110);
    let test = keyword_set(200, 111);
    let fit = || -> Result<String, String> {
        let examples: Vec<(&str, &str)> = train.iter().map(|(t, l)| (t.as_str(), *l)).collect();
        let model = NaiveBayes::train(Task::Info, &examples, BayesConfig::default()).map_err(|e| e.to_string())?;
        let preds: Vec<&str> = test.iter().map(|(t, _)| model.predict(t)).collect();
        let report = evaluate(Task::Info, test.iter().map(|(_, l)| *l).zip(preds)).map_err(|e| e.to_string())?;
        serde_json::to_string(&report).map_err(|e| e.to_string())
    };
    let (a, b) = (fit()?, fit()?);
    ensure(a == b, || "evaluation reports differ between runs".into())?;
    let report: serde_json::Value = serde_json::from_str(&a).unwrap();
    let f1 = report["micro_f1"].as_f64().unwrap();
    ensure(f1 >= 0.9, || format!("micro-F1 {f1:.4}"))?;
    Ok(format!("micro-F1 {f1:.4} on 200 held-out posts, deterministic"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 11] = [
        ("k selection on separated blobs", criterion_1),
        ("split/merge refinement", criterion_2),
        ("strict thresholds", criterion_3),
        ("chi-square", criterion_4),
        ("Cohen's kappa", criterion_5),
        ("one-way ANOVA", criterion_6),
        ("silhouette", criterion_7),
        ("micro-F1", criterion_8),
        ("embedding round-trip", criterion_9),
        ("reproducible CLI report", criterion_10),
        ("baseline text classifier", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || label.contains(f.as_str())) {
            continue;
        }
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("{label} PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("{label} FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("{label} FAIL  {name}: panicked");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
