//! Cohort statistics: group summaries, ICC(2,1) reliability, Pearson
//! correlation with Fisher-z intervals, paired t-tests and the tables that
//! combine them.

pub mod discrepancy;
pub mod distributions;
mod icc;
mod pearson;
mod summary;
pub mod tables;
mod ttest;

use thiserror::Error;

pub use discrepancy::{compare_to_reference, parse_reference, Discrepancy, ReferenceValue};
pub use distributions::{f_cdf, f_quantile, reg_inc_beta, t_cdf, t_two_tailed_p};
pub use icc::{icc, IccResult, ICC_MODEL};
pub use pearson::{fisher_ci, pearson, pearson_ci, CorrelationResult};
pub use summary::{group_summary, mean, sample_sd, GroupSummary};
pub use tables::{stats_tables, CohortIndexData, CohortStats, IndexStats, StatKind};
pub use ttest::{paired_t, Pairing, TTestResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("inputs differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("paired differences have zero variance")]
    ZeroVarianceDifferences,
    #[error("all entries identical; ICC undefined")]
    DegenerateVariance,
    #[error("subjects x trials matrix is incomplete")]
    IncompleteMatrix,
    #[error("non-finite input value")]
    NonFinite,
    #[error("{0} did not converge")]
    NonConvergence(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not computable from the supplied data: {0}")]
    Unavailable(&'static str),
}

impl StatsError {
    /// Short tag used for error cells in rendered tables.
    pub fn kind(&self) -> &'static str {
        match self {
            StatsError::TooFew { .. } => "TooFew",
            StatsError::LengthMismatch { .. } => "LengthMismatch",
            StatsError::ZeroVariance => "ZeroVariance",
            StatsError::ZeroVarianceDifferences => "ZeroVarianceDifferences",
            StatsError::DegenerateVariance => "DegenerateVariance",
            StatsError::IncompleteMatrix => "IncompleteMatrix",
            StatsError::NonFinite => "NonFinite",
            StatsError::NonConvergence(_) => "NonConvergence",
            StatsError::InvalidArgument(_) => "InvalidArgument",
            StatsError::Unavailable(_) => "Unavailable",
        }
    }
}

fn all_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}
