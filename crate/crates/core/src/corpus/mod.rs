//! Corpus construction from dumps: keyword matching on titles, subreddit
//! ranking and classification, the collection policy, topic subsets and
//! author anonymization.

mod anonymize;
mod collect;
mod matcher;
mod subreddits;

use std::path::{Path, PathBuf};

pub use anonymize::{anonymize, AuthorHash, AuthorHasher, DELETED_AUTHOR, SALT_ENV};
pub use collect::{
    derive_subset, dump_kind, lexicon_digest, link_target, utc_day, ClassCounts, CollectOptions,
    Collector, Corpus, CorpusCounts, CorpusFiles, CorpusKind, CorpusManifest, DateRange,
    DumpInputs, FileRef, IngestSummary, LexiconRef, COMMENTS_FILE, MANIFEST_FILE,
    SUBMISSIONS_FILE,
};
pub use matcher::{naive_title_match, TitleMatcher};
pub use subreddits::{
    category_totals, classify_subreddits, rank_subreddits, suggest_lists, SubredditCategory,
    SubredditClassifier, SubredditLists, SubredditProfile, SubredditTally, SuggestOptions,
    REFERENCE_CENTRIC_SUBREDDITS, REFERENCE_INCLUSIVE_SUBREDDITS,
};

use crate::ingest::IngestError;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("lexicon has no usable keywords")]
    EmptyLexicon,
    #[error("subreddits listed as both centric and inclusive: {}", .0.join(", "))]
    OverlappingLists(Vec<String>),
    #[error("author salt missing: set {SALT_ENV}")]
    MissingSalt,
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("cannot tell whether {0} holds submissions or comments")]
    UnknownDumpKind(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {message}")]
    InvalidManifest { path: PathBuf, message: String },
    #[error("invalid corpus configuration: {0}")]
    InvalidConfig(String),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
