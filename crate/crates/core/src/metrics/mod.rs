//! Scale summaries and observer comparisons.

mod brainscore;
mod chisq;
mod score;
mod skew;
mod spearman;
mod variance;

pub use brainscore::{
    brainscore_comparison, parse_brain_scores, read_brain_scores, write_plot_data,
    ComparisonReport, ComparisonRow,
};
pub use chisq::{chi_squared_null_test, pearson_statistic, ChiSquaredResult, DEFAULT_BINS};
pub use score::{psychophysical_score, ScoreReport, MIN_SHARED_PAIRS};
pub use skew::{skewness, skewness_set, SkewnessSet};
pub use spearman::spearman_rho;
pub use variance::{variance_table, variance_table_with, VarianceKind, VarianceRow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("only {found} class pairs shared, need at least {needed}")]
    InsufficientOverlap { found: usize, needed: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
