use std::path::Path;

use serde::{Deserialize, Serialize};
use vistheme_core::cluster::KSearchParams;
use vistheme_core::refine::{DegeneratePolicy, RefineConfig};
use vistheme_core::textmodel::BayesConfig;

use crate::error::invalid_config;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ClusterSection {
    fn default() -> Self {
        Self { k_min: 5, k_max: 20, restarts: 8, max_iter: 300, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub sample_size: usize,
    pub dominance_threshold: f64,
    pub significance_threshold: f64,
    pub max_rounds: usize,
    pub coders: usize,
    pub degenerate: DegeneratePolicy,
    pub restarts: usize,
    /// Off: measure consistency of the initial clusters only.
    pub split_merge: bool,
}

impl Default for RefineSection {
    fn default() -> Self {
        let d = RefineConfig::default();
        Self {
            sample_size: d.sample_size,
            dominance_threshold: d.dominance_threshold,
            significance_threshold: d.significance_threshold,
            max_rounds: d.max_rounds,
            coders: d.coders,
            degenerate: d.degenerate,
            restarts: d.restarts,
            split_merge: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Offset used to bucket posts into calendar days.
    pub utc_offset_hours: i32,
    pub yates: bool,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self { utc_offset_hours: 8, yates: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub cluster: ClusterSection,
    pub refine: RefineSection,
    pub classify: BayesConfig,
    pub report: ReportSection,
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid_config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Self =
            toml::from_str(&text).map_err(|e| invalid_config(format!("config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let c = &self.cluster;
        if c.k_min < 2 || c.k_min > c.k_max {
            return Err(invalid_config(format!("cluster: need 2 <= k_min <= k_max, got {}..{}", c.k_min, c.k_max)));
        }
        if c.restarts == 0 || c.max_iter == 0 || c.tol.is_nan() || c.tol < 0.0 {
            return Err(invalid_config("cluster: restarts and max_iter must be >= 1 and tol >= 0"));
        }
        self.refine_config().validate().map_err(|e| invalid_config(e.to_string()))?;
        let b = &self.classify;
        if b.min_n == 0 || b.min_n > b.max_n || b.alpha.is_nan() || b.alpha <= 0.0 || b.max_features == 0 {
            return Err(invalid_config("classify: need 1 <= min_n <= max_n, alpha > 0, max_features >= 1"));
        }
        if self.report.utc_offset_hours.abs() > 14 {
            return Err(invalid_config("report: utc_offset_hours must be within ±14"));
        }
        Ok(())
    }

    pub fn k_search(&self) -> KSearchParams {
        let c = &self.cluster;
        KSearchParams {
            k_min: c.k_min,
            k_max: c.k_max,
            seed: self.seed,
            restarts: c.restarts,
            max_iter: c.max_iter,
            tol: c.tol,
        }
    }

    pub fn refine_config(&self) -> RefineConfig {
        let r = &self.refine;
        RefineConfig {
            sample_size: r.sample_size,
            dominance_threshold: r.dominance_threshold,
            significance_threshold: r.significance_threshold,
            max_rounds: r.max_rounds,
            seed: self.seed,
            coders: r.coders,
            degenerate: r.degenerate,
            restarts: r.restarts,
            max_iter: self.cluster.max_iter,
            tol: self.cluster.tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn parses_sections() {
        let cfg: Config = toml::from_str("seed = 3\n[cluster]\nk_min = 2\nk_max = 4\n[refine]\nsplit_merge = false\ndegenerate = \"accept\"\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.cluster.k_max, 4);
        assert_eq!(cfg.cluster.restarts, 8);
        assert!(!cfg.refine.split_merge);
        assert_eq!(cfg.refine.degenerate, DegeneratePolicy::Accept);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_ranges() {
        assert!(toml::from_str::<Config>("[cluster]\nkmin = 2\n").is_err());
        let cfg: Config = toml::from_str("[cluster]\nk_min = 9\nk_max = 4\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg: Config = toml::from_str("[refine]\nsignificance_threshold = 0.9\n").unwrap();
        assert!(cfg.validate().is_err());
    }
}
