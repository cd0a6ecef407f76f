//! Encyclopedia page retrieval with an on-disk cache.
//!
//! Backends answer `search` and `fetch`; [`PageSource`] layers the cache,
//! markup stripping and de-duplication on top.

mod backend;
mod cache;
mod markup;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use backend::{FixtureBackend, MediaWikiBackend, PageBackend, RawPage};
pub use cache::{normalize_title, PageCache};
pub use markup::strip_markup;

#[derive(Debug, thiserror::Error)]
pub enum PageError {
    #[error("page not found: {0}")]
    PageNotFound(String),
    #[error("page backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("page cache: {0}")]
    Cache(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcePage {
    pub title: String,
    pub page_id: String,
    pub body: String,
    /// Seed term whose search surfaced the page, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved_for: Option<String>,
    /// Seconds since the Unix epoch.
    pub fetch_time: u64,
    /// Set when the backend returned a title with no content.
    #[serde(default)]
    pub is_stub: bool,
}

/// The first `n` whitespace-delimited words of the page body joined by
/// single spaces.
pub fn first_n_words(page: &SourcePage, n: usize) -> Result<String, PageError> {
    if n == 0 {
        return Err(PageError::InvalidArgument("n must be at least 1".into()));
    }
    Ok(page.body.split_whitespace().take(n).collect::<Vec<_>>().join(" "))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSettings {
    /// Directory of `<title>.txt` files plus an optional `index.json`.
    Fixture { dir: PathBuf },
    MediaWiki {
        #[serde(default = "default_mediawiki_endpoint")]
        endpoint: String,
    },
}

fn default_mediawiki_endpoint() -> String {
    "https://en.wikipedia.org/w/api.php".to_string()
}

impl BackendSettings {
    pub fn build(&self) -> Box<dyn PageBackend> {
        match self {
            BackendSettings::Fixture { dir } => Box::new(FixtureBackend::new(dir.clone())),
            BackendSettings::MediaWiki { endpoint } => Box::new(MediaWikiBackend::new(endpoint.clone())),
        }
    }
}

pub struct PageSource {
    backend: Box<dyn PageBackend>,
    cache: Option<PageCache>,
    backend_fetches: AtomicU64,
}

impl PageSource {
    pub fn new(backend: Box<dyn PageBackend>, cache: Option<PageCache>) -> Self {
        Self { backend, cache, backend_fetches: AtomicU64::new(0) }
    }

    /// Number of fetches that reached the backend (cache misses).
    pub fn backend_fetches(&self) -> u64 {
        self.backend_fetches.load(Ordering::Relaxed)
    }

    /// Up to `limit` distinct titles in backend ranking order. No matches
    /// is an empty list, not an error.
    pub fn search(&self, seed_term: &str, limit: usize) -> Result<Vec<String>, PageError> {
        if limit == 0 {
            return Err(PageError::InvalidArgument("search limit must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::new();
        let mut titles = Vec::new();
        for title in self.backend.search(seed_term, limit)? {
            if titles.len() == limit {
                break;
            }
            if seen.insert(title.clone()) {
                titles.push(title);
            }
        }
        Ok(titles)
    }

    pub fn fetch(&self, title: &str) -> Result<SourcePage, PageError> {
        if title.trim().is_empty() {
            return Err(PageError::InvalidArgument("empty page title".into()));
        }
        if let Some(cache) = &self.cache {
            if let Some(page) = cache.get(title)? {
                return Ok(page);
            }
        }
        self.backend_fetches.fetch_add(1, Ordering::Relaxed);
        let raw = self.backend.fetch(title)?;
        let body = strip_markup(&raw.body);
        let page = SourcePage {
            is_stub: body.trim().is_empty(),
            title: raw.title,
            page_id: raw.page_id,
            body,
            retrieved_for: None,
            fetch_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        if let Some(cache) = &self.cache {
            cache.put(title, &page)?;
        }
        Ok(page)
    }
}
