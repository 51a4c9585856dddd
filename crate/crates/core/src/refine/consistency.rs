use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{RefineConfig, RefineError};

/// Theme prevalences within one cluster's labeled sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub cluster: usize,
    pub sample_n: usize,
    pub counts: BTreeMap<String, usize>,
    pub prevalences: BTreeMap<String, f64>,
    /// Most prevalent theme; ties go to the lexicographically smallest.
    pub dominant_theme: String,
    pub max_prevalence: f64,
    /// `max_prevalence > dominance_threshold`.
    pub consistent: bool,
    /// Themes with prevalence `> significance_threshold`, most prevalent
    /// first.
    pub significant_themes: Vec<String>,
}

impl ConsistencyReport {
    pub fn from_counts(
        cluster: usize,
        counts: BTreeMap<String, usize>,
        config: &RefineConfig,
    ) -> Result<Self, RefineError> {
        let sample_n: usize = counts.values().sum();
        if sample_n == 0 {
            return Err(RefineError::NeedsLabels { clusters: vec![cluster] });
        }
        // count / n is correctly rounded, so a prevalence that equals a
        // decimal threshold exactly compares equal to it.
        let prevalences: BTreeMap<String, f64> =
            counts.iter().map(|(t, &c)| (t.clone(), c as f64 / sample_n as f64)).collect();
        let (dominant_theme, &top) = counts
            .iter()
            .rev()
            .max_by_key(|&(_, c)| c)
            .expect("non-empty counts");
        let max_prevalence = top as f64 / sample_n as f64;
        let mut significant: Vec<(&String, usize)> = counts
            .iter()
            .filter(|(t, _)| prevalences[*t] > config.significance_threshold)
            .map(|(t, &c)| (t, c))
            .collect();
        significant.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self {
            cluster,
            sample_n,
            dominant_theme: dominant_theme.clone(),
            max_prevalence,
            consistent: max_prevalence > config.dominance_threshold,
            significant_themes: significant.into_iter().map(|(t, _)| t.clone()).collect(),
            counts,
            prevalences,
        })
    }

    /// Pool the samples of several reports into one (used for merged
    /// clusters).
    pub fn pooled<'a, I>(cluster: usize, reports: I, config: &RefineConfig) -> Result<Self, RefineError>
    where
        I: IntoIterator<Item = &'a ConsistencyReport>,
    {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for r in reports {
            for (t, &c) in &r.counts {
                *counts.entry(t.clone()).or_default() += c;
            }
        }
        Self::from_counts(cluster, counts, config)
    }
}

/// Measure one cluster from its adjudicated sample labels.
pub fn measure_consistency<'a, I>(
    cluster: usize,
    themes: I,
    config: &RefineConfig,
) -> Result<ConsistencyReport, RefineError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in themes {
        *counts.entry(t.to_string()).or_default() += 1;
    }
    ConsistencyReport::from_counts(cluster, counts, config)
}

/// Unweighted mean of per-cluster dominant prevalence.
pub fn average_within_cluster_consistency(reports: &[ConsistencyReport]) -> Option<f64> {
    crate::stats::average_consistency(reports.iter().map(|r| r.max_prevalence))
}
