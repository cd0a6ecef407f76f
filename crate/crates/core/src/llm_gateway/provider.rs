//! Completion providers: an OpenAI-compatible HTTP client and a
//! deterministic offline stub.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::template::TemplateId;
use super::{CompletionRequest, GatewayError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    /// The provider stopped because it hit the response token limit.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    /// Worth retrying: transport failure, rate limiting, server error.
    #[error("transient provider failure: {0}")]
    Transient(String),
    #[error("provider rejected request: {0}")]
    Rejected(String),
}

pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, prompt: &str, request: &CompletionRequest) -> Result<Completion, ProviderError>;
}

/// Lowercase hex SHA-256 of a rendered prompt; the key of stub fixture maps.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Offline provider. Looks the rendered prompt up in a fixture map first;
/// otherwise synthesizes a response from the prompt and its hash, so the
/// same request always yields the same text.
///
/// Synthesized responses: page filter answers `YES`, keyword extraction
/// returns capitalized phrases from the chunk scored by frequency plus a
/// hash-derived offset, keyword filtering echoes the list it was given.
#[derive(Debug, Clone, Default)]
pub struct StubProvider {
    fixtures: HashMap<String, String>,
}

impl StubProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fixtures(fixtures: HashMap<String, String>) -> Self {
        Self { fixtures }
    }

    /// Load a JSON object of prompt-hash → response text.
    pub fn from_fixture_file(path: &Path) -> Result<Self, GatewayError> {
        let raw = fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("fixture map {}: {e}", path.display())))?;
        let fixtures: HashMap<String, String> = serde_json::from_str(&raw)
            .map_err(|e| GatewayError::Config(format!("fixture map {}: {e}", path.display())))?;
        Ok(Self { fixtures })
    }

    pub fn insert_fixture(&mut self, prompt: &str, response: impl Into<String>) {
        self.fixtures.insert(prompt_hash(prompt), response.into());
    }
}

impl CompletionProvider for StubProvider {
    fn name(&self) -> &str {
        "stub"
    }

    fn complete(&self, prompt: &str, request: &CompletionRequest) -> Result<Completion, ProviderError> {
        let digest = Sha256::digest(prompt.as_bytes());
        if let Some(text) = self.fixtures.get(&hex::encode(digest)) {
            return Ok(Completion { text: text.clone(), truncated: false });
        }
        let var = |name: &str| request.variables.get(name).map(String::as_str).unwrap_or("");
        let text = match request.template_id {
            TemplateId::PageFilter => "YES".to_string(),
            TemplateId::KeywordExtract => synthesize_keywords(var("text"), &digest),
            TemplateId::KeywordFilter => var("keyword_list").to_string(),
        };
        Ok(Completion { text, truncated: false })
    }
}

const STUB_KEYWORDS_PER_CHUNK: usize = 8;

const STUB_STOPWORDS: &[&str] = &[
    "a", "after", "an", "and", "as", "at", "before", "but", "by", "during", "for", "from", "he",
    "her", "his", "in", "it", "its", "many", "most", "of", "on", "one", "she", "some", "that",
    "the", "their", "there", "these", "they", "this", "those", "to", "when", "while", "with",
];

fn synthesize_keywords(text: &str, digest: &[u8]) -> String {
    let mut counts: BTreeMap<String, (String, u32)> = BTreeMap::new();
    let mut run: Vec<&str> = Vec::new();
    let mut flush = |run: &mut Vec<&str>| {
        for phrase in run.chunks(3) {
            let surface = phrase.join(" ");
            let entry = counts
                .entry(surface.to_lowercase())
                .or_insert_with(|| (surface.clone(), 0));
            entry.1 += 1;
        }
        run.clear();
    };
    for raw in text.split_whitespace() {
        let core = raw.trim_matches(|c: char| !c.is_alphanumeric());
        let capitalized = core.chars().next().is_some_and(char::is_uppercase)
            && core.chars().count() >= 3
            && !core.contains([',', ':'])
            && !STUB_STOPWORDS.contains(&core.to_lowercase().as_str());
        if capitalized {
            run.push(core);
        } else {
            flush(&mut run);
        }
        let ends_clause = raw.ends_with(|c: char| !c.is_alphanumeric());
        if ends_clause {
            flush(&mut run);
        }
    }
    flush(&mut run);

    let mut ranked: Vec<(String, u32)> = counts.into_values().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.to_lowercase().cmp(&b.0.to_lowercase())));
    ranked
        .into_iter()
        .take(STUB_KEYWORDS_PER_CHUNK)
        .enumerate()
        .map(|(i, (surface, freq))| {
            let offset = u32::from(digest[i % digest.len()] % 3);
            format!("{surface}: {}", (freq + offset).min(5))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpProviderSettings {
    /// Chat-completions endpoint URL.
    pub endpoint: String,
    pub model: String,
    /// Usually supplied through the environment rather than the config file.
    #[serde(default, skip_serializing)]
    pub api_key: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    120
}

/// OpenAI-compatible chat-completions client.
pub struct HttpProvider {
    settings: HttpProviderSettings,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(settings: HttpProviderSettings) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(settings.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self { settings, agent }
    }
}

impl CompletionProvider for HttpProvider {
    fn name(&self) -> &str {
        &self.settings.model
    }

    fn complete(&self, prompt: &str, request: &CompletionRequest) -> Result<Completion, ProviderError> {
        let body = json!({
            "model": self.settings.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.settings.temperature,
            "max_tokens": request.max_response_tokens,
        });
        let mut call = self.agent.post(&self.settings.endpoint);
        if let Some(key) = &self.settings.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(&body)
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(ProviderError::Transient(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(ProviderError::Rejected(format!("HTTP {status}")));
        }
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Transient(format!("reading response: {e}")))?;
        let choice = &value["choices"][0];
        let text = choice["message"]["content"]
            .as_str()
            .ok_or_else(|| ProviderError::Rejected("response has no message content".into()))?
            .to_string();
        let truncated = choice["finish_reason"].as_str() == Some("length");
        Ok(Completion { text, truncated })
    }
}
