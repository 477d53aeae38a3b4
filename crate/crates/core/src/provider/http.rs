use std::num::NonZeroU32;

use async_trait::async_trait;
use governor::{DefaultDirectRateLimiter, Quota, RateLimiter};
use serde_json::Value;

use super::{Backend, BackendError, ConfigError, RawWebHit, ResponseMapping, WebQuery};
use crate::model::EmailId;

pub const DEFAULT_RATE_LIMIT_RPS: u32 = 5;

/// The exact search string sent to web backends: the normalized address in
/// double quotes.
pub fn web_query(email: &EmailId) -> String {
    format!("\"{}\"", email.normalized())
}

/// A JSON-over-HTTP provider described entirely by configuration.
///
/// Every request (searches and page fetches) draws from one token bucket.
pub struct HttpBackend {
    client: reqwest::Client,
    endpoint_template: String,
    mapping: ResponseMapping,
    limiter: DefaultDirectRateLimiter,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint_template", &self.endpoint_template)
            .field("mapping", &self.mapping)
            .finish_non_exhaustive()
    }
}

fn encode(value: &str) -> String {
    url::form_urlencoded::byte_serialize(value.as_bytes()).collect()
}

impl HttpBackend {
    pub fn new(
        endpoint_template: String,
        mapping: ResponseMapping,
        rate_limit_rps: u32,
    ) -> Result<Self, ConfigError> {
        let rps = NonZeroU32::new(rate_limit_rps)
            .ok_or_else(|| ConfigError::ZeroRateLimit(endpoint_template.clone()))?;
        let client = reqwest::Client::builder()
            .user_agent(concat!("weipe/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| ConfigError::HttpClient(e.to_string()))?;
        Ok(Self {
            client,
            endpoint_template,
            mapping,
            limiter: RateLimiter::direct(Quota::per_second(rps)),
        })
    }

    /// Substitutes `{email}` and `{query}` with URL-encoded values.
    pub fn render(&self, email: &EmailId, query: &str) -> String {
        self.endpoint_template
            .replace("{email}", &encode(email.normalized()))
            .replace("{query}", &encode(query))
    }

    async fn get_json(&self, url: &str) -> Result<Value, BackendError> {
        self.limiter.until_ready().await;
        let response = self
            .client
            .get(url)
            .send()
            .await
            .map_err(|e| BackendError::Http(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(BackendError::Http(format!("{url}: status {status}")));
        }
        response
            .json()
            .await
            .map_err(|e| BackendError::Malformed(e.to_string()))
    }

    fn items<'a>(&self, document: &'a Value) -> Result<&'a Vec<Value>, BackendError> {
        document
            .pointer(&self.mapping.items)
            .and_then(Value::as_array)
            .ok_or_else(|| {
                BackendError::Malformed(format!("no array at {:?}", self.mapping.items))
            })
    }
}

fn text_at(item: &Value, pointer: &str) -> Option<String> {
    match item.pointer(pointer)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

#[async_trait]
impl Backend for HttpBackend {
    async fn social(&self, email: &EmailId, _limit: usize) -> Result<Vec<Value>, BackendError> {
        let document = self.get_json(&self.render(email, email.normalized())).await?;
        Ok(self.items(&document)?.clone())
    }

    async fn web(&self, query: &WebQuery, _limit: usize) -> Result<Vec<RawWebHit>, BackendError> {
        let document = self.get_json(&self.render(&query.email, &query.query)).await?;
        Ok(self
            .items(&document)?
            .iter()
            .filter_map(|item| {
                Some(RawWebHit {
                    url: text_at(item, &self.mapping.url)?,
                    title: text_at(item, &self.mapping.title).unwrap_or_default(),
                    snippet: text_at(item, &self.mapping.snippet).unwrap_or_default(),
                })
            })
            .collect())
    }

    async fn page(&self, url: &str) -> Result<Option<String>, BackendError> {
        self.limiter.until_ready().await;
        let response = self
            .client
            .get(url)
            .send()
            .await
            .map_err(|e| BackendError::Http(e.to_string()))?;
        if response.status() == reqwest::StatusCode::NOT_FOUND {
            return Ok(None);
        }
        if !response.status().is_success() {
            return Err(BackendError::Http(format!("{url}: status {}", response.status())));
        }
        let bytes = response
            .bytes()
            .await
            .map_err(|e| BackendError::Http(e.to_string()))?;
        Ok(Some(String::from_utf8_lossy(&bytes).into_owned()))
    }
}
