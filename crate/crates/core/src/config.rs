//! Run configuration and the shipped defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{AdapterSettings, AnalyzeOptions};
use crate::corpus::{CollectOptions, SubredditLists, SALT_ENV};
use crate::lexicon::LexiconConfig;
use crate::llm_gateway::ProviderSettings;
use crate::page_source::BackendSettings;

/// The three seed-term sets used to build the main lexicon and the two
/// subset lexicons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPreset {
    IsraelHamas,
    ZionismAntisemitism,
    PalestineIslamophobia,
}

impl SeedPreset {
    pub fn seed_terms(self) -> Vec<String> {
        let terms: &[&str] = match self {
            SeedPreset::IsraelHamas => &["Israel–Hamas war", "Israel", "Hamas", "Palestinian", "Gaza"],
            SeedPreset::ZionismAntisemitism => &["Zionism", "antisemitism"],
            SeedPreset::PalestineIslamophobia => &["Free Palestine", "Islamophobia"],
        };
        terms.iter().map(|s| s.to_string()).collect()
    }

    pub fn topic(self) -> &'static str {
        match self {
            SeedPreset::IsraelHamas => "the Israel-Hamas war",
            SeedPreset::ZionismAntisemitism => "Zionism and antisemitism",
            SeedPreset::PalestineIslamophobia => "Free Palestine and Islamophobia",
        }
    }
}

/// Page retrieval settings for keyword extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PagesSettings {
    pub backend: BackendSettings,
    /// On-disk page cache; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    /// Per-stage results for resuming an interrupted extraction.
    pub work_dir: Option<PathBuf>,
}

impl Default for PagesSettings {
    fn default() -> Self {
        Self {
            backend: BackendSettings::MediaWiki {
                endpoint: "https://en.wikipedia.org/w/api.php".to_string(),
            },
            cache_dir: None,
            work_dir: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub adapter: AdapterSettings,
    pub options: AnalyzeOptions,
}

/// The shared configuration file. Every field has a default; secrets (the
/// provider key and the author salt) come from the environment only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lexicon: LexiconConfig,
    pub provider: ProviderSettings,
    pub pages: PagesSettings,
    pub subreddits: SubredditLists,
    pub collect: CollectOptions,
    /// Dump files or directories, used when none are given on the command
    /// line.
    pub dumps: Vec<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Environment variable holding the author-hash salt.
    pub salt_env: String,
    pub analysis: AnalysisSettings,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lexicon: LexiconConfig::default(),
            provider: ProviderSettings::default(),
            pages: PagesSettings::default(),
            subreddits: SubredditLists::default(),
            collect: CollectOptions::default(),
            dumps: Vec::new(),
            out_dir: None,
            salt_env: SALT_ENV.to_string(),
            analysis: AnalysisSettings::default(),
            jobs: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config: RunConfig = serde_json::from_slice(&raw).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every section; run before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(m);
        self.lexicon.validate().map_err(|e| invalid(e.to_string()))?;
        self.subreddits.classifier().map_err(|e| invalid(e.to_string()))?;
        self.collect.ingest.validate().map_err(invalid)?;
        self.analysis.options.validate().map_err(|e| invalid(e.to_string()))?;
        if self.jobs == Some(0) {
            return Err(invalid("jobs must be at least 1".into()));
        }
        if self.salt_env.trim().is_empty() {
            return Err(invalid("salt_env is empty".into()));
        }
        if let ProviderSettings::Http(h) = &self.provider {
            if h.endpoint.trim().is_empty() || h.model.trim().is_empty() {
                return Err(invalid("http provider needs an endpoint and a model".into()));
            }
            if !(0.0..=2.0).contains(&h.temperature) {
                return Err(invalid(format!("temperature {} outside [0, 2]", h.temperature)));
            }
        }
        Ok(())
    }

    /// Snapshot embedded in output manifests.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let back: RunConfig = serde_json::from_value(c.snapshot()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn shipped_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.lexicon.max_chunk_tokens, 3000);
        assert_eq!(c.lexicon.top_n, 200);
        assert_eq!(c.subreddits.centric.len(), 25);
        assert_eq!(c.analysis.options.top_n, 20);
    }

    #[test]
    fn unknown_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"lexicon": {"top_n": 10}, "colour": 1}"#).unwrap();
        assert!(matches!(RunConfig::load(&p), Err(ConfigError::Parse { .. })));
        std::fs::write(&p, r#"{"lexicon": {"top_n": 0}}"#).unwrap();
        assert!(matches!(RunConfig::load(&p), Err(ConfigError::Invalid(_))));
        std::fs::write(&p, r#"{"jobs": 2, "subreddits": {"centric": ["a"], "inclusive": ["A"]}}"#).unwrap();
        assert!(matches!(RunConfig::load(&p), Err(ConfigError::Invalid(_))));
        std::fs::write(&p, r#"{"lexicon": {"top_n": 10}}"#).unwrap();
        assert_eq!(RunConfig::load(&p).unwrap().lexicon.top_n, 10);
    }
}
