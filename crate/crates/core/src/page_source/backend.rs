use std::collections::HashMap;
use std::fs;
use std::io::ErrorKind;
use std::path::PathBuf;
use std::time::Duration;

use super::PageError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPage {
    pub title: String,
    pub page_id: String,
    pub body: String,
}

pub trait PageBackend: Send + Sync {
    /// Titles for `term` in backend ranking order; may contain duplicates.
    fn search(&self, term: &str, limit: usize) -> Result<Vec<String>, PageError>;

    fn fetch(&self, title: &str) -> Result<RawPage, PageError>;
}

/// Reads `<title>.txt` files from a directory. `index.json`, when present,
/// maps search terms (case-insensitive) to ranked title lists; without it,
/// search returns titles containing the term, sorted.
#[derive(Debug, Clone)]
pub struct FixtureBackend {
    dir: PathBuf,
}

impl FixtureBackend {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    fn file_for(&self, title: &str) -> PathBuf {
        self.dir.join(format!("{}.txt", title.replace(['/', '\\'], "_")))
    }

    fn unavailable(&self, e: impl std::fmt::Display) -> PageError {
        PageError::BackendUnavailable(format!("{}: {e}", self.dir.display()))
    }
}

impl PageBackend for FixtureBackend {
    fn search(&self, term: &str, limit: usize) -> Result<Vec<String>, PageError> {
        let index_path = self.dir.join("index.json");
        match fs::read_to_string(&index_path) {
            Ok(raw) => {
                let index: HashMap<String, Vec<String>> =
                    serde_json::from_str(&raw).map_err(|e| self.unavailable(e))?;
                let wanted = term.to_lowercase();
                Ok(index
                    .into_iter()
                    .find(|(k, _)| k.to_lowercase() == wanted)
                    .map(|(_, titles)| titles.into_iter().take(limit.saturating_mul(2)).collect())
                    .unwrap_or_default())
            }
            Err(e) if e.kind() == ErrorKind::NotFound => {
                let wanted = term.to_lowercase();
                let mut titles: Vec<String> = fs::read_dir(&self.dir)
                    .map_err(|e| self.unavailable(e))?
                    .filter_map(|entry| entry.ok())
                    .filter_map(|entry| {
                        entry
                            .file_name()
                            .to_str()
                            .and_then(|n| n.strip_suffix(".txt"))
                            .map(str::to_string)
                    })
                    .filter(|title| title.to_lowercase().contains(&wanted))
                    .collect();
                titles.sort();
                titles.truncate(limit);
                Ok(titles)
            }
            Err(e) => Err(self.unavailable(e)),
        }
    }

    fn fetch(&self, title: &str) -> Result<RawPage, PageError> {
        match fs::read_to_string(self.file_for(title)) {
            Ok(body) => Ok(RawPage {
                title: title.to_string(),
                page_id: format!("fixture:{title}"),
                body,
            }),
            Err(e) if e.kind() == ErrorKind::NotFound => Err(PageError::PageNotFound(title.to_string())),
            Err(e) => Err(self.unavailable(e)),
        }
    }
}

/// MediaWiki action API: full-text search plus plain-text extracts.
pub struct MediaWikiBackend {
    endpoint: String,
    agent: ureq::Agent,
}

impl MediaWikiBackend {
    pub fn new(endpoint: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .user_agent("topicorpus/0.1")
            .build()
            .into();
        Self { endpoint, agent }
    }

    fn get(&self, params: &[(&str, &str)]) -> Result<serde_json::Value, PageError> {
        let mut request = self.agent.get(&self.endpoint);
        for (k, v) in params {
            request = request.query(*k, *v);
        }
        request
            .call()
            .map_err(|e| PageError::BackendUnavailable(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| PageError::BackendUnavailable(e.to_string()))
    }
}

impl PageBackend for MediaWikiBackend {
    fn search(&self, term: &str, limit: usize) -> Result<Vec<String>, PageError> {
        let limit = limit.to_string();
        let value = self.get(&[
            ("action", "query"),
            ("list", "search"),
            ("srsearch", term),
            ("srlimit", &limit),
            ("format", "json"),
        ])?;
        Ok(value["query"]["search"]
            .as_array()
            .map(|hits| {
                hits.iter()
                    .filter_map(|h| h["title"].as_str().map(str::to_string))
                    .collect()
            })
            .unwrap_or_default())
    }

    fn fetch(&self, title: &str) -> Result<RawPage, PageError> {
        let value = self.get(&[
            ("action", "query"),
            ("prop", "extracts"),
            ("explaintext", "1"),
            ("redirects", "1"),
            ("titles", title),
            ("format", "json"),
        ])?;
        let pages = value["query"]["pages"]
            .as_object()
            .ok_or_else(|| PageError::BackendUnavailable("malformed extracts response".into()))?;
        let (page_id, page) = pages
            .iter()
            .find(|(_, p)| p.get("missing").is_none())
            .ok_or_else(|| PageError::PageNotFound(title.to_string()))?;
        Ok(RawPage {
            title: page["title"].as_str().unwrap_or(title).to_string(),
            page_id: page_id.clone(),
            body: page["extract"].as_str().unwrap_or_default().to_string(),
        })
    }
}
