//! Pipeline orchestration and report emission.

mod boxplot;
mod pipeline;
mod subject_table;

pub use boxplot::{emit_boxplot, five_number_summary, quantile_type7, BoxPlot, BoxPlotError, FiveNumberSummary};
pub use pipeline::{
    analyze_cohort, run_pipeline, write_stats_outputs, CohortAnalysis, PipelineConfig, PipelineError, PipelineReport, TrialFailure,
    TrialOutcome,
};
pub use subject_table::{read_subject_table, write_index_table, write_subject_table, SubjectRow};

/// Quantile convention used for box plots, recorded in run metadata.
pub const QUANTILE_METHOD: &str = "type 7 (linear interpolation between order statistics)";

/// Fixed output formatting: 6 significant digits, shortest representation.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.5e}").parse().expect("formatted float parses");
    if (1e-4..1e15).contains(&rounded.abs()) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}
