#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini").join(name)
}

pub fn vistheme(run_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vistheme"))
        .arg("--run-dir")
        .arg(run_dir)
        .arg("--config")
        .arg(fixture("config.toml"))
        .args(args)
        .output()
        .expect("spawn vistheme")
}

pub fn ok(run_dir: &Path, args: &[&str]) -> String {
    let out = vistheme(run_dir, args);
    assert!(
        out.status.success(),
        "vistheme {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ingest through refine on the mini corpus.
pub fn through_refine(run_dir: &Path) {
    ok(run_dir, &["ingest", path(&fixture("posts.jsonl"))]);
    ok(run_dir, &["embed", "--from", path(&fixture("embeddings.csv")), "--name", "fixture"]);
    ok(run_dir, &["cluster"]);
    ok(run_dir, &["refine", "--labels", path(&fixture("image_themes.csv"))]);
}

pub fn full_pipeline(run_dir: &Path) {
    through_refine(run_dir);
    ok(run_dir, &["classify", "--task", "info", "--predictions", path(&fixture("info_predictions.csv"))]);
    ok(run_dir, &["classify", "--task", "emotion", "--predictions", path(&fixture("emotion_predictions.csv"))]);
    ok(run_dir, &["stats"]);
    ok(run_dir, &["report"]);
}
