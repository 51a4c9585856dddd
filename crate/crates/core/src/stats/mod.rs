//! Statistical kernels: contingency tables and chi-square, one-way ANOVA,
//! Cohen's kappa, daily series and descriptive summaries.

mod anova;
mod contingency;
mod kappa;
pub mod special;
mod summary;
mod temporal;

pub use anova::{one_way_anova, AnovaResult};
pub use contingency::{chi_square, cross_tabulate, ChiSquareOptions, ChiSquareResult, ContingencyTable};
pub use kappa::{cohens_kappa, cohens_kappa_keyed, KappaResult};
pub use summary::{average_consistency, describe, Descriptive};
pub use temporal::{temporal_series, TemporalSeries, UNLABELED};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("zero marginal total for {0}")]
    ZeroMarginal(String),
    #[error("misaligned inputs: {0}")]
    Misaligned(String),
    #[error("table shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite observation")]
    NonFinite,
}
