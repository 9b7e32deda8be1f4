//! Metrics and regressions over stored game records, with text and CSV
//! reports.

pub mod design;
pub mod error;
pub mod metrics;
pub mod regression;
pub mod report;

pub use design::{deviation_code, deviation_design_matrix, reference_effect, DesignMatrix, Factor};
pub use error::AnalyticsError;
pub use metrics::{compute_metrics, score_ratio, ConditionMetrics, MetricsSummary, Proportion, ScoreTiming, TokenCurve};
pub use regression::{
    dependent_columns, fit_logistic_l1, fit_ols, fit_polynomial, LogisticOptions, PolyFit, RegressionResult, INTERCEPT,
};
pub use report::{analyze, emit_report, standard_regressions, WIN_LAMBDA};
