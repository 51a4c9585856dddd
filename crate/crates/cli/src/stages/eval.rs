//! Cross-run consistency table: one row per backend, method and
//! split-merge setting.

use std::path::{Path, PathBuf};

use super::refine::{summary_path, RefineSummary};
use super::report::{consistency_row, CONSISTENCY_HEADER};
use super::{write_csv, REFINE};
use crate::error::missing_stage;

pub fn run(runs: &[PathBuf], out: Option<&Path>) -> anyhow::Result<()> {
    let mut rows = Vec::with_capacity(runs.len());
    for run in runs {
        let path = summary_path(run);
        if !path.exists() {
            return Err(missing_stage(REFINE, &format!("eval-consistency ({})", run.display())));
        }
        let s: RefineSummary = serde_json::from_slice(&std::fs::read(&path)?)?;
        rows.push(consistency_row(&s));
    }
    match out {
        Some(path) => {
            write_csv(path, &CONSISTENCY_HEADER, rows)?;
            println!("eval-consistency: {} row(s) written to {}", runs.len(), path.display());
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(CONSISTENCY_HEADER)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
