//! Provider registry and the two dispatch paths (social and web).
//!
//! Every provider is wrapped in a [`Provider`]: its descriptor plus a live
//! [`Backend`]. Fetches never fail outright; timeouts and backend errors are
//! reported through [`ProviderResponse::status`].

mod fixture;
mod http;

pub use fixture::FixtureBackend;
pub use http::{web_query, HttpBackend, DEFAULT_RATE_LIMIT_RPS};

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::model::{
    absolute_http_url, EmailId, ResponseStatus, SocialResultItem, SourceId, SourceKind, Threshold,
    WebResultItem,
};

pub const MIN_TIMEOUT_MS: u64 = 100;
pub const MAX_TIMEOUT_MS: u64 = 60_000;
pub const DEFAULT_TIMEOUT_MS: u64 = 2_000;

/// Where a JSON response keeps its result items.
///
/// Paths are JSON pointers (`/data/results`). `url`, `title` and `snippet`
/// are resolved relative to each item and only matter for web providers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseMapping {
    pub items: String,
    #[serde(default = "default_url_path")]
    pub url: String,
    #[serde(default = "default_title_path")]
    pub title: String,
    #[serde(default = "default_snippet_path")]
    pub snippet: String,
}

fn default_url_path() -> String {
    "/url".into()
}

fn default_title_path() -> String {
    "/title".into()
}

fn default_snippet_path() -> String {
    "/snippet".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendSpec {
    Fixture {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        corpus_path: Option<PathBuf>,
    },
    Http {
        /// URL with `{query}` and/or `{email}` placeholders.
        endpoint_template: String,
        response_mapping: ResponseMapping,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate_limit_rps: Option<u32>,
    },
}

/// Static configuration of one provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderDescriptor {
    pub id: SourceId,
    pub priority: u32,
    #[serde(default)]
    pub eps_override: Option<Threshold>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    pub backend: BackendSpec,
}

fn default_timeout_ms() -> u64 {
    DEFAULT_TIMEOUT_MS
}

impl ProviderDescriptor {
    pub fn fixture(id: SourceId, priority: u32, corpus_path: Option<PathBuf>) -> Self {
        Self {
            id,
            priority,
            eps_override: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            backend: BackendSpec::Fixture { corpus_path },
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("provider name is empty")]
    EmptyProviderName,
    #[error("provider {0:?} registered twice")]
    DuplicateProvider(String),
    #[error("priority {priority} of {provider:?} is already taken")]
    DuplicatePriority { provider: String, priority: u32 },
    #[error("priority of {0:?} must be positive")]
    ZeroPriority(String),
    #[error("timeout {timeout_ms} ms of {provider:?} outside [{MIN_TIMEOUT_MS}, {MAX_TIMEOUT_MS}]")]
    TimeoutOutOfRange { provider: String, timeout_ms: u64 },
    #[error("fixture provider {0:?} has no corpus path and no default corpus was given")]
    MissingCorpus(String),
    #[error("rate limit of {0:?} must be positive")]
    ZeroRateLimit(String),
    #[error("http client: {0}")]
    HttpClient(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// A raw web hit as a backend reported it, before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawWebHit {
    pub url: String,
    pub title: String,
    pub snippet: String,
}

/// What a web backend is asked for.
#[derive(Debug, Clone)]
pub struct WebQuery {
    pub email: EmailId,
    /// The normalized address wrapped in double quotes.
    pub query: String,
}

impl WebQuery {
    pub fn new(email: &EmailId) -> Self {
        Self {
            email: email.clone(),
            query: web_query(email),
        }
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("http: {0}")]
    Http(String),
    #[error("{0}")]
    Other(String),
}

/// A source of raw results. `limit` is a hint; the caller truncates anyway.
#[async_trait]
pub trait Backend: Send + Sync {
    async fn social(
        &self,
        email: &EmailId,
        limit: usize,
    ) -> Result<Vec<serde_json::Value>, BackendError>;

    async fn web(&self, query: &WebQuery, limit: usize) -> Result<Vec<RawWebHit>, BackendError>;

    /// Body of a page referenced by a web hit; `None` when it does not exist.
    async fn page(&self, url: &str) -> Result<Option<String>, BackendError>;
}

/// A registered provider with its live backend.
pub struct Provider {
    descriptor: ProviderDescriptor,
    backend: Arc<dyn Backend>,
}

impl std::fmt::Debug for Provider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Provider")
            .field("descriptor", &self.descriptor)
            .finish_non_exhaustive()
    }
}

impl Provider {
    pub fn new(descriptor: ProviderDescriptor, backend: Arc<dyn Backend>) -> Self {
        Self {
            descriptor,
            backend,
        }
    }

    pub fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    pub fn id(&self) -> &SourceId {
        &self.descriptor.id
    }

    pub fn priority(&self) -> u32 {
        self.descriptor.priority
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.descriptor.timeout_ms)
    }

    pub fn effective_eps(&self, eps: Threshold) -> Threshold {
        eps.min(self.descriptor.eps_override)
    }

    /// Fetches page bodies under this provider's timeout.
    pub async fn page(&self, url: &str) -> Result<Option<String>, BackendError> {
        match tokio::time::timeout(self.timeout(), self.backend.page(url)).await {
            Ok(result) => result,
            Err(_) => Err(BackendError::Other(format!(
                "page fetch exceeded {} ms",
                self.descriptor.timeout_ms
            ))),
        }
    }
}

/// The outcome of one provider fetch.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderResponse {
    pub source: SourceId,
    pub priority: u32,
    pub status: ResponseStatus,
    pub message: Option<String>,
    pub social_items: Vec<SocialResultItem>,
    pub web_items: Vec<WebResultItem>,
    pub latency_ms: u64,
}

impl ProviderResponse {
    fn failed(provider: &Provider, status: ResponseStatus, message: String, latency_ms: u64) -> Self {
        Self {
            source: provider.id().clone(),
            priority: provider.priority(),
            status,
            message: Some(message),
            social_items: Vec::new(),
            web_items: Vec::new(),
            latency_ms,
        }
    }

    pub fn item_count(&self) -> usize {
        self.social_items.len() + self.web_items.len()
    }
}

fn ok_or_empty(count: usize) -> ResponseStatus {
    if count == 0 {
        ResponseStatus::Empty
    } else {
        ResponseStatus::Ok
    }
}

/// Queries a social provider for `email`, keeping at most the effective
/// threshold of items. Non-object payloads are skipped and ranks compacted.
pub async fn fetch_social(
    provider: &Provider,
    email: &EmailId,
    eps: Threshold,
    clock: &dyn Clock,
) -> ProviderResponse {
    let started = clock.monotonic_ms();
    let elapsed = || clock.monotonic_ms().saturating_sub(started);
    if provider.id().kind != SourceKind::Social {
        return ProviderResponse::failed(
            provider,
            ResponseStatus::Error,
            "not a social provider".into(),
            0,
        );
    }
    let limit = provider.effective_eps(eps).as_usize();
    let fetched =
        tokio::time::timeout(provider.timeout(), provider.backend.social(email, limit)).await;
    let payloads = match fetched {
        Err(_) => {
            return ProviderResponse::failed(
                provider,
                ResponseStatus::Timeout,
                format!("no answer within {} ms", provider.descriptor.timeout_ms),
                elapsed(),
            )
        }
        Ok(Err(e)) => {
            return ProviderResponse::failed(provider, ResponseStatus::Error, e.to_string(), elapsed())
        }
        Ok(Ok(payloads)) => payloads,
    };
    let social_items: Vec<SocialResultItem> = payloads
        .into_iter()
        .filter_map(|p| match p {
            serde_json::Value::Object(map) => Some(map),
            _ => None,
        })
        .take(limit)
        .enumerate()
        .map(|(i, payload)| SocialResultItem {
            source: provider.id().clone(),
            rank: i as u32 + 1,
            payload,
        })
        .collect();
    ProviderResponse {
        source: provider.id().clone(),
        priority: provider.priority(),
        status: ok_or_empty(social_items.len()),
        message: None,
        social_items,
        web_items: Vec::new(),
        latency_ms: elapsed(),
    }
}

/// Queries a web provider with the quoted address. Hits whose URL is not an
/// absolute http(s) URL are skipped and ranks compacted.
pub async fn fetch_web(
    provider: &Provider,
    email: &EmailId,
    eps: Threshold,
    clock: &dyn Clock,
) -> ProviderResponse {
    let started = clock.monotonic_ms();
    let elapsed = || clock.monotonic_ms().saturating_sub(started);
    if provider.id().kind != SourceKind::Web {
        return ProviderResponse::failed(
            provider,
            ResponseStatus::Error,
            "not a web provider".into(),
            0,
        );
    }
    let limit = provider.effective_eps(eps).as_usize();
    let query = WebQuery::new(email);
    let fetched = tokio::time::timeout(provider.timeout(), provider.backend.web(&query, limit)).await;
    let hits = match fetched {
        Err(_) => {
            return ProviderResponse::failed(
                provider,
                ResponseStatus::Timeout,
                format!("no answer within {} ms", provider.descriptor.timeout_ms),
                elapsed(),
            )
        }
        Ok(Err(e)) => {
            return ProviderResponse::failed(provider, ResponseStatus::Error, e.to_string(), elapsed())
        }
        Ok(Ok(hits)) => hits,
    };
    let web_items: Vec<WebResultItem> = hits
        .into_iter()
        .filter(|h| absolute_http_url(&h.url).is_some())
        .take(limit)
        .enumerate()
        .map(|(i, hit)| WebResultItem {
            source: provider.id().clone(),
            rank: i as u32 + 1,
            url: hit.url.trim().to_owned(),
            title: hit.title,
            snippet: hit.snippet,
        })
        .collect();
    ProviderResponse {
        source: provider.id().clone(),
        priority: provider.priority(),
        status: ok_or_empty(web_items.len()),
        message: None,
        social_items: Vec::new(),
        web_items,
        latency_ms: elapsed(),
    }
}

/// Dispatches to the path matching the provider's kind.
pub async fn fetch(
    provider: &Provider,
    email: &EmailId,
    eps: Threshold,
    clock: &dyn Clock,
) -> ProviderResponse {
    match provider.id().kind {
        SourceKind::Social => fetch_social(provider, email, eps, clock).await,
        SourceKind::Web => fetch_web(provider, email, eps, clock).await,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DispatchError {
    #[error("provider registry is empty")]
    EmptyRegistry,
}

/// The ordered set of providers an engine fans out to.
#[derive(Debug, Default)]
pub struct Registry {
    providers: Vec<Arc<Provider>>,
}

impl Registry {
    /// Builds backends for the descriptors. Fixture providers without their
    /// own `corpus_path` use `default_corpus`.
    pub fn from_descriptors(
        descriptors: Vec<ProviderDescriptor>,
        default_corpus: Option<&Path>,
    ) -> Result<Self, ConfigError> {
        let mut providers = Vec::with_capacity(descriptors.len());
        for descriptor in descriptors {
            let backend: Arc<dyn Backend> = match &descriptor.backend {
                BackendSpec::Fixture { corpus_path } => {
                    let root = corpus_path
                        .as_deref()
                        .or(default_corpus)
                        .ok_or_else(|| {
                            ConfigError::MissingCorpus(descriptor.id.provider_name.clone())
                        })?;
                    Arc::new(FixtureBackend::new(root, &descriptor.id.provider_name))
                }
                BackendSpec::Http {
                    endpoint_template,
                    response_mapping,
                    rate_limit_rps,
                } => {
                    let rps = rate_limit_rps.unwrap_or(DEFAULT_RATE_LIMIT_RPS);
                    if rps == 0 {
                        return Err(ConfigError::ZeroRateLimit(
                            descriptor.id.provider_name.clone(),
                        ));
                    }
                    Arc::new(HttpBackend::new(
                        endpoint_template.clone(),
                        response_mapping.clone(),
                        rps,
                    )?)
                }
            };
            providers.push(Provider::new(descriptor, backend));
        }
        Self::new(providers)
    }

    /// Validates names, priorities and timeouts.
    pub fn new(providers: Vec<Provider>) -> Result<Self, ConfigError> {
        let mut names = HashSet::new();
        let mut priorities = HashSet::new();
        for p in &providers {
            let d = p.descriptor();
            let name = &d.id.provider_name;
            if name.trim().is_empty() {
                return Err(ConfigError::EmptyProviderName);
            }
            if !names.insert(name.clone()) {
                return Err(ConfigError::DuplicateProvider(name.clone()));
            }
            if d.priority == 0 {
                return Err(ConfigError::ZeroPriority(name.clone()));
            }
            if !priorities.insert(d.priority) {
                return Err(ConfigError::DuplicatePriority {
                    provider: name.clone(),
                    priority: d.priority,
                });
            }
            if !(MIN_TIMEOUT_MS..=MAX_TIMEOUT_MS).contains(&d.timeout_ms) {
                return Err(ConfigError::TimeoutOutOfRange {
                    provider: name.clone(),
                    timeout_ms: d.timeout_ms,
                });
            }
        }
        Ok(Self {
            providers: providers.into_iter().map(Arc::new).collect(),
        })
    }

    /// One fixture provider per directory under `<corpus>/social` and
    /// `<corpus>/web`, social first, each group in name order.
    pub fn discover(corpus: &Path) -> Result<Self, ConfigError> {
        let mut descriptors = Vec::new();
        for kind in [SourceKind::Social, SourceKind::Web] {
            let dir = corpus.join(kind.as_str());
            let mut names = match std::fs::read_dir(&dir) {
                Ok(entries) => entries
                    .filter_map(Result::ok)
                    .filter(|e| e.file_type().is_ok_and(|t| t.is_dir()))
                    .filter_map(|e| e.file_name().into_string().ok())
                    .collect::<Vec<_>>(),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
                Err(source) => return Err(ConfigError::Io { path: dir, source }),
            };
            names.sort();
            for name in names {
                let priority = descriptors.len() as u32 + 1;
                descriptors.push(ProviderDescriptor::fixture(
                    SourceId::new(kind, name),
                    priority,
                    None,
                ));
            }
        }
        Self::from_descriptors(descriptors, Some(corpus))
    }

    pub fn providers(&self) -> &[Arc<Provider>] {
        &self.providers
    }

    pub fn len(&self) -> usize {
        self.providers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }

    pub fn get(&self, id: &SourceId) -> Option<&Arc<Provider>> {
        self.providers.iter().find(|p| p.id() == id)
    }
}

/// Queries every provider concurrently, one task each. Responses come back
/// in registry order; a provider that panics is reported as an error.
pub async fn dispatch_all(
    registry: &Registry,
    email: &EmailId,
    eps: Threshold,
    clock: Arc<dyn Clock>,
) -> Result<Vec<ProviderResponse>, DispatchError> {
    if registry.is_empty() {
        return Err(DispatchError::EmptyRegistry);
    }
    let handles: Vec<_> = registry
        .providers()
        .iter()
        .map(|provider| {
            let provider = Arc::clone(provider);
            let email = email.clone();
            let clock = Arc::clone(&clock);
            tokio::spawn(async move { fetch(&provider, &email, eps, clock.as_ref()).await })
        })
        .collect();
    let joined = futures::future::join_all(handles).await;
    Ok(joined
        .into_iter()
        .zip(registry.providers())
        .map(|(result, provider)| {
            result.unwrap_or_else(|e| {
                ProviderResponse::failed(
                    provider,
                    ResponseStatus::Error,
                    format!("provider task failed: {e}"),
                    0,
                )
            })
        })
        .collect())
}
