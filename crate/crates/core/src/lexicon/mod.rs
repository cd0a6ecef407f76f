//! Topic lexicon construction.
//!
//! Seed terms → page search → fetch → relevance filter → chunking →
//! per-chunk keyword scoring → mean within a page, sum across pages →
//! top-N cut → containment filter → generic-keyword filter.

mod aggregate;
mod chunk;
mod containment;
mod pipeline;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::llm_gateway::{GatewayError, RetryPolicy};
use crate::page_source::PageError;

pub use aggregate::{
    aggregate_corpus, keyword_key, merge_page_keywords, rank_order, sum_across_pages, CorpusKeyword,
    PageKeyword,
};
pub use chunk::{split_page, TextChunk};
pub use containment::{containment_filter, containment_filter_by};
pub use pipeline::{
    extract_page_keywords, filter_pages, generic_filter, read_lexicon, run_pipeline,
    write_json_atomic, write_lexicon, PageExtraction, PageFilterOutcome, PipelineContext, PipelineOutput,
    RunMetadata, StageCounts, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Search,
    Fetch,
    FilterPages,
    Extraction,
    Aggregate,
    Containment,
    GenericFilter,
    Persist,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Search => "search",
            Stage::Fetch => "fetch",
            Stage::FilterPages => "filter_pages",
            Stage::Extraction => "extraction",
            Stage::Aggregate => "aggregate",
            Stage::Containment => "containment",
            Stage::GenericFilter => "generic_filter",
            Stage::Persist => "persist",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("stage {stage}: {source}")]
    Provider {
        stage: Stage,
        #[source]
        source: GatewayError,
    },
    #[error("stage {stage}: {source}")]
    Pages {
        stage: Stage,
        #[source]
        source: PageError,
    },
    #[error("stage generic_filter: lexicon is empty after filtering")]
    LexiconEmpty,
    #[error("stage persist: {0}")]
    Persist(String),
    #[error("invalid lexicon configuration: {0}")]
    InvalidConfig(String),
}

impl LexiconError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            LexiconError::Provider { stage, .. } | LexiconError::Pages { stage, .. } => Some(*stage),
            LexiconError::LexiconEmpty => Some(Stage::GenericFilter),
            LexiconError::Persist(_) => Some(Stage::Persist),
            LexiconError::InvalidConfig(_) => None,
        }
    }
}

/// Every parameter of one extraction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconConfig {
    pub seed_terms: Vec<String>,
    pub topic: String,
    pub per_seed_search_limit: usize,
    /// Words of page body shown to the relevance filter.
    pub page_filter_words: usize,
    pub max_chunk_tokens: usize,
    pub top_n: usize,
    pub extract_response_tokens: u32,
    pub filter_response_tokens: u32,
    pub retry: RetryPolicy,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        let preset = crate::config::SeedPreset::IsraelHamas;
        Self {
            seed_terms: preset.seed_terms(),
            topic: preset.topic().to_string(),
            per_seed_search_limit: 40,
            page_filter_words: 100,
            max_chunk_tokens: 3000,
            top_n: 200,
            extract_response_tokens: 1024,
            filter_response_tokens: 4096,
            retry: RetryPolicy::default(),
        }
    }
}

impl LexiconConfig {
    pub fn validate(&self) -> Result<(), LexiconError> {
        let bad = |m: &str| Err(LexiconError::InvalidConfig(m.to_string()));
        if self.seed_terms.iter().all(|s| s.trim().is_empty()) {
            return bad("at least one seed term is required");
        }
        if self.topic.trim().is_empty() {
            return bad("topic is empty");
        }
        if self.per_seed_search_limit == 0 {
            return bad("per_seed_search_limit must be at least 1");
        }
        if self.page_filter_words == 0 {
            return bad("page_filter_words must be at least 1");
        }
        if self.max_chunk_tokens == 0 {
            return bad("max_chunk_tokens must be at least 1");
        }
        if self.top_n == 0 {
            return bad("top_n must be at least 1");
        }
        if self.extract_response_tokens == 0 || self.filter_response_tokens == 0 {
            return bad("response token limits must be positive");
        }
        Ok(())
    }
}

/// Ranked, filtered keywords for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordLexicon {
    pub topic: String,
    pub entries: Vec<CorpusKeyword>,
    pub config_snapshot: LexiconConfig,
}

impl KeywordLexicon {
    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.keyword.as_str())
    }
}
