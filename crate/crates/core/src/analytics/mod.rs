//! Time series and aggregates over a built corpus: daily volumes,
//! popularity, unique authors, controversy, subreddit rankings, conversation
//! lengths, and per-label daily means of externally supplied moral and
//! emotion confidences.
//!
//! Every output is a commutative reduction over the records, so reports do
//! not depend on input order. Days are UTC.

mod adapter;
mod labels;
mod report;
mod series;

use std::path::{Path, PathBuf};

pub use adapter::{
    AdapterSettings, BatchResult, ClassificationSummary, ClassifierAdapter, ClassifierCache, ClassifyRequest,
    FileExchangeAdapter, StubAdapter, PREPARED_RESPONSES,
};
pub use labels::{all_labels, LabelVector, EMOTION_LABELS, MORAL_LABELS};
pub use report::{
    analyze_corpus, analyze_records, read_bundle, write_bundle, write_report, AnalysisBundle, AnalyzeOptions,
    CorpusRef, ReportFormat, ANALYSIS_FILE,
};
pub use series::{
    controversy_daily, daily_counts, label_daily_mean, popularity_series, subreddit_controversy, top_counts,
    top_subreddits, unique_authors_daily, utc_date, DailyPoint, DailySeries, LabelMeans, SubredditControversy,
    SubredditCount, TopSubreddits,
};

use crate::corpus::CorpusError;

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("label schema: {0}")]
    Schema(String),
    #[error("classifier adapter unavailable: {0}")]
    AdapterUnavailable(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{kind} daily counts sum to {series_total}, manifest records {manifest_total}")]
    Conservation {
        kind: &'static str,
        series_total: u64,
        manifest_total: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid analysis bundle {path}: {message}")]
    InvalidBundle { path: PathBuf, message: String },
    #[error("invalid analysis configuration: {0}")]
    InvalidConfig(String),
}

impl AnalyticsError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        AnalyticsError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
