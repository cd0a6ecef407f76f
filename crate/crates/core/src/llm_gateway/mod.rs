//! Text-completion gateway: prompt templates, provider abstraction with
//! retry, and parsers for the structured responses.
//!
//! A call goes render → complete → parse. Providers only see rendered text;
//! retries and truncation checks live in [`Gateway`].

mod parse;
mod provider;
mod template;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use parse::{
    format_scored_keywords, parse_keyword_list, parse_scored_keywords, parse_yes_no, ParsedKeywords,
    ScoredKeyword, ScoredKeywordList, MAX_KEYWORD_TOKENS, MAX_SCORE, MIN_SCORE,
};
pub use provider::{
    prompt_hash, Completion, CompletionProvider, HttpProvider, HttpProviderSettings, ProviderError,
    StubProvider,
};
pub use template::{render, PromptTemplate, TemplateId, KEYWORD_EXTRACT, KEYWORD_FILTER, PAGE_FILTER};

/// Environment variable that overrides the configured provider API key.
pub const API_KEY_ENV: &str = "TOPICORPUS_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("missing template variable `{0}`")]
    MissingVariable(String),
    #[error("unknown template variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("provider unavailable after {attempts} attempts: {last_error}")]
    ProviderUnavailable { attempts: u32, last_error: String },
    #[error("provider rejected request: {0}")]
    ProviderRejected(String),
    #[error("response truncated at {max_response_tokens} tokens")]
    ResponseTooLong { max_response_tokens: u32 },
    #[error("provider configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("response is neither YES nor NO: {0:?}")]
    UnparseableVerdict(String),
    #[error("no usable entries in response")]
    EmptyResult,
}

/// A template id plus exactly the variables its placeholders need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub template_id: TemplateId,
    pub variables: BTreeMap<String, String>,
    pub max_response_tokens: u32,
}

impl CompletionRequest {
    pub fn new<K, V>(
        template_id: TemplateId,
        variables: impl IntoIterator<Item = (K, V)>,
        max_response_tokens: u32,
    ) -> Result<Self, GatewayError>
    where
        K: Into<String>,
        V: Into<String>,
    {
        if max_response_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_response_tokens must be positive".into()));
        }
        let variables: BTreeMap<String, String> = variables
            .into_iter()
            .map(|(k, v)| (k.into(), v.into()))
            .collect();
        let placeholders = template_id.template().placeholders;
        if let Some(missing) = placeholders.iter().find(|p| !variables.contains_key(**p)) {
            return Err(GatewayError::MissingVariable(missing.to_string()));
        }
        if let Some(extra) = variables.keys().find(|k| !placeholders.contains(&k.as_str())) {
            return Err(GatewayError::UnknownVariable(extra.clone()));
        }
        Ok(Self { template_id, variables, max_response_tokens })
    }

    pub fn render(&self) -> Result<String, GatewayError> {
        render(self.template_id, &self.variables)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 3, base_delay_ms: 500, max_delay_ms: 30_000 }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based): base · 2^retry, capped.
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

/// Provider selection as it appears in the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderSettings {
    Stub {
        /// JSON map of prompt-hash → response text.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fixtures: Option<PathBuf>,
    },
    Http(HttpProviderSettings),
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings::Stub { fixtures: None }
    }
}

impl ProviderSettings {
    pub fn build(&self) -> Result<Box<dyn CompletionProvider>, GatewayError> {
        match self {
            ProviderSettings::Stub { fixtures: None } => Ok(Box::new(StubProvider::new())),
            ProviderSettings::Stub { fixtures: Some(path) } => {
                Ok(Box::new(StubProvider::from_fixture_file(path)?))
            }
            ProviderSettings::Http(settings) => {
                let mut settings = settings.clone();
                if let Ok(key) = std::env::var(API_KEY_ENV) {
                    if !key.is_empty() {
                        settings.api_key = Some(key);
                    }
                }
                Ok(Box::new(HttpProvider::new(settings)))
            }
        }
    }

    /// Sampling temperature recorded in run metadata; the stub has none.
    pub fn temperature(&self) -> Option<f64> {
        match self {
            ProviderSettings::Stub { .. } => None,
            ProviderSettings::Http(s) => Some(s.temperature),
        }
    }
}

/// A provider plus the retry budget applied to each request.
pub struct Gateway {
    provider: Box<dyn CompletionProvider>,
    retry: RetryPolicy,
    calls: AtomicU64,
    retries: AtomicU64,
}

impl Gateway {
    pub fn new(provider: Box<dyn CompletionProvider>, retry: RetryPolicy) -> Self {
        Self { provider, retry, calls: AtomicU64::new(0), retries: AtomicU64::new(0) }
    }

    pub fn stub() -> Self {
        Self::new(Box::new(StubProvider::new()), RetryPolicy::default())
    }

    pub fn provider_name(&self) -> &str {
        self.provider.name()
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn retries(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let prompt = request.render()?;
        let mut retry = 0;
        loop {
            self.calls.fetch_add(1, Ordering::Relaxed);
            match self.provider.complete(&prompt, request) {
                Ok(c) if c.truncated => {
                    return Err(GatewayError::ResponseTooLong {
                        max_response_tokens: request.max_response_tokens,
                    })
                }
                Ok(c) => return Ok(c.text),
                Err(ProviderError::Rejected(msg)) => return Err(GatewayError::ProviderRejected(msg)),
                Err(ProviderError::Transient(msg)) => {
                    if retry >= self.retry.max_retries {
                        return Err(GatewayError::ProviderUnavailable {
                            attempts: retry + 1,
                            last_error: msg,
                        });
                    }
                    log::warn!("{}: {msg}; retry {} of {}", self.provider.name(), retry + 1, self.retry.max_retries);
                    thread::sleep(self.retry.delay(retry));
                    self.retries.fetch_add(1, Ordering::Relaxed);
                    retry += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Scripted {
        script: Mutex<Vec<Result<Completion, ProviderError>>>,
    }

    impl CompletionProvider for Scripted {
        fn name(&self) -> &str {
            "scripted"
        }
        fn complete(&self, _: &str, _: &CompletionRequest) -> Result<Completion, ProviderError> {
            self.script.lock().unwrap().remove(0)
        }
    }

    fn no_wait(max_retries: u32) -> RetryPolicy {
        RetryPolicy { max_retries, base_delay_ms: 0, max_delay_ms: 0 }
    }

    fn filter_request() -> CompletionRequest {
        CompletionRequest::new(TemplateId::KeywordFilter, [("keyword_list", "a")], 16).unwrap()
    }

    fn ok(text: &str) -> Result<Completion, ProviderError> {
        Ok(Completion { text: text.into(), truncated: false })
    }

    #[test]
    fn request_must_cover_placeholders_exactly() {
        let err = CompletionRequest::new(TemplateId::PageFilter, [("page_name", "A")], 8).unwrap_err();
        assert!(matches!(err, GatewayError::MissingVariable(n) if n == "topic"));
        let err = CompletionRequest::new(
            TemplateId::KeywordFilter,
            [("keyword_list", "a"), ("topic", "b")],
            8,
        )
        .unwrap_err();
        assert!(matches!(err, GatewayError::UnknownVariable(n) if n == "topic"));
        assert!(CompletionRequest::new(TemplateId::KeywordFilter, [("keyword_list", "a")], 0).is_err());
    }

    #[test]
    fn retries_transient_failures() {
        let provider = Scripted {
            script: Mutex::new(vec![
                Err(ProviderError::Transient("reset".into())),
                Err(ProviderError::Transient("reset".into())),
                ok("Hamas"),
            ]),
        };
        let gateway = Gateway::new(Box::new(provider), no_wait(2));
        assert_eq!(gateway.complete(&filter_request()).unwrap(), "Hamas");
        assert_eq!(gateway.calls(), 3);
        assert_eq!(gateway.retries(), 2);
    }

    #[test]
    fn gives_up_after_budget() {
        let provider = Scripted {
            script: Mutex::new(vec![
                Err(ProviderError::Transient("down".into())),
                Err(ProviderError::Transient("down".into())),
            ]),
        };
        let gateway = Gateway::new(Box::new(provider), no_wait(1));
        let err = gateway.complete(&filter_request()).unwrap_err();
        assert!(matches!(err, GatewayError::ProviderUnavailable { attempts: 2, .. }));
    }

    #[test]
    fn truncation_is_an_error() {
        let provider = Scripted {
            script: Mutex::new(vec![Ok(Completion { text: "a: 1, b".into(), truncated: true })]),
        };
        let gateway = Gateway::new(Box::new(provider), no_wait(3));
        assert!(matches!(
            gateway.complete(&filter_request()),
            Err(GatewayError::ResponseTooLong { max_response_tokens: 16 })
        ));
    }

    #[test]
    fn rejection_is_not_retried() {
        let provider = Scripted {
            script: Mutex::new(vec![Err(ProviderError::Rejected("HTTP 401".into())), ok("x")]),
        };
        let gateway = Gateway::new(Box::new(provider), no_wait(3));
        assert!(matches!(gateway.complete(&filter_request()), Err(GatewayError::ProviderRejected(_))));
        assert_eq!(gateway.calls(), 1);
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let policy = RetryPolicy { max_retries: 10, base_delay_ms: 100, max_delay_ms: 1000 };
        assert_eq!(policy.delay(0), Duration::from_millis(100));
        assert_eq!(policy.delay(2), Duration::from_millis(400));
        assert_eq!(policy.delay(9), Duration::from_millis(1000));
        assert_eq!(policy.delay(200), Duration::from_millis(1000));
    }

    #[test]
    fn unreachable_http_provider_is_unavailable() {
        let settings = HttpProviderSettings {
            endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
            model: "m".into(),
            api_key: None,
            temperature: 0.0,
            timeout_secs: 2,
        };
        let gateway = Gateway::new(Box::new(HttpProvider::new(settings)), no_wait(1));
        assert!(matches!(
            gateway.complete(&filter_request()),
            Err(GatewayError::ProviderUnavailable { attempts: 2, .. })
        ));
    }

    #[test]
    fn settings_parse_from_json() {
        let s: ProviderSettings = serde_json::from_str(r#"{"kind":"stub"}"#).unwrap();
        assert_eq!(s, ProviderSettings::Stub { fixtures: None });
        let s: ProviderSettings = serde_json::from_str(
            r#"{"kind":"http","endpoint":"http://x","model":"gpt-4"}"#,
        )
        .unwrap();
        assert_eq!(s.temperature(), Some(0.0));
    }
}
