//! HTTP front end: identify endpoint with caching, request coalescing and a
//! search log, plus health and static UI hosting.

mod cache;
mod log;
mod wire;

pub use cache::{CacheEntry, CacheKey, ResponseCache};
pub use log::{read_log, LogEntry, LogReadout, ProviderStatus, SessionLog};
pub use wire::{error_body, health_body, identify_body};

use std::collections::HashMap;
use std::future::Future;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::OnceCell;
use tower_http::services::ServeDir;

use crate::config::DEFAULT_CACHE_TTL_S;
use crate::engine::{Engine, EngineError};
use crate::model::{normalize_email, ConsolidatedIdentity, Threshold};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub cache_enabled: bool,
    pub ttl_s: u64,
    pub log_path: Option<PathBuf>,
    /// Directory holding the built web UI; a placeholder page is served
    /// when absent.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            cache_enabled: true,
            ttl_s: DEFAULT_CACHE_TTL_S,
            log_path: None,
            ui_dir: None,
        }
    }
}

/// A finished API answer: status code and JSON text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: String,
}

impl ApiResponse {
    fn json(status: StatusCode, body: String) -> Self {
        Self {
            status: status.as_u16(),
            body,
        }
    }

    fn error(status: StatusCode, code: &str) -> Self {
        Self::json(status, error_body(code))
    }
}

impl IntoResponse for ApiResponse {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, [(header::CONTENT_TYPE, "application/json")], self.body).into_response()
    }
}

type Inflight = OnceCell<Arc<ConsolidatedIdentity>>;

pub struct Service {
    engine: Arc<Engine>,
    cache: Option<ResponseCache>,
    log: Option<SessionLog>,
    inflight: Mutex<HashMap<CacheKey, Arc<Inflight>>>,
    ui_dir: Option<PathBuf>,
}

impl std::fmt::Debug for Service {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Service")
            .field("engine", &self.engine)
            .field("cache", &self.cache)
            .field("log", &self.log)
            .finish_non_exhaustive()
    }
}

/// Parses the `eps` query parameter.
pub fn parse_eps(raw: Option<&str>) -> Result<Option<Threshold>, ()> {
    match raw {
        None => Ok(None),
        Some(s) => s
            .trim()
            .parse::<i64>()
            .ok()
            .and_then(|n| Threshold::new(n).ok())
            .map(Some)
            .ok_or(()),
    }
}

impl Service {
    pub fn new(engine: Arc<Engine>, config: ServiceConfig) -> std::io::Result<Self> {
        let log = config.log_path.map(SessionLog::open).transpose()?;
        Ok(Self {
            engine,
            cache: config.cache_enabled.then(|| ResponseCache::new(config.ttl_s)),
            log,
            inflight: Mutex::new(HashMap::new()),
            ui_dir: config.ui_dir,
        })
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn log(&self) -> Option<&SessionLog> {
        self.log.as_ref()
    }

    fn record(&self, identity: &ConsolidatedIdentity) {
        if let Some(log) = &self.log {
            let entry = LogEntry::from_identity(identity, self.engine.clock().now());
            if let Err(e) = log.append(&entry) {
                tracing::error!(path = %log.path().display(), error = %e, "cannot append to search log");
            }
        }
    }

    /// Runs one lookup, sharing the fan-out with concurrent identical calls.
    async fn lookup(
        &self,
        key: CacheKey,
        email: &crate::model::EmailId,
        eps: Threshold,
    ) -> Result<Arc<ConsolidatedIdentity>, EngineError> {
        let cell = {
            let mut inflight = self.inflight.lock().unwrap_or_else(|e| e.into_inner());
            Arc::clone(inflight.entry(key.clone()).or_default())
        };
        let result = cell
            .get_or_try_init(|| async {
                let identity = Arc::new(self.engine.identify(email, Some(eps)).await?);
                if let Some(cache) = &self.cache {
                    if !identity.all_providers_failed() {
                        cache.put(key.clone(), Arc::clone(&identity), self.engine.clock().now());
                    }
                }
                Ok::<_, EngineError>(identity)
            })
            .await
            .cloned();
        let mut inflight = self.inflight.lock().unwrap_or_else(|e| e.into_inner());
        if inflight.get(&key).is_some_and(|c| Arc::ptr_eq(c, &cell)) {
            inflight.remove(&key);
        }
        result
    }

    /// The identify endpoint, independent of the HTTP layer.
    pub async fn identify(&self, email_param: Option<&str>, eps_param: Option<&str>) -> ApiResponse {
        let Some(Ok(email)) = email_param.map(normalize_email) else {
            return ApiResponse::error(StatusCode::BAD_REQUEST, "invalid_email");
        };
        let Ok(eps) = parse_eps(eps_param) else {
            return ApiResponse::error(StatusCode::BAD_REQUEST, "invalid_eps");
        };
        let eps = eps.unwrap_or(self.engine.default_eps());
        let key: CacheKey = (email.normalized().to_owned(), eps.get());

        if let Some(hit) = self
            .cache
            .as_ref()
            .and_then(|c| c.get(&key, self.engine.clock().now()))
        {
            self.record(&hit);
            return ApiResponse::json(StatusCode::OK, identify_body(&hit, true));
        }

        match self.lookup(key, &email, eps).await {
            Ok(identity) => {
                self.record(&identity);
                if identity.all_providers_failed() {
                    ApiResponse::error(StatusCode::SERVICE_UNAVAILABLE, "all_providers_failed")
                } else {
                    ApiResponse::json(StatusCode::OK, identify_body(&identity, false))
                }
            }
            Err(e) => {
                tracing::error!(error = %e, "identify failed");
                ApiResponse::error(StatusCode::SERVICE_UNAVAILABLE, "engine_unavailable")
            }
        }
    }

    pub fn health(&self) -> ApiResponse {
        ApiResponse::json(StatusCode::OK, health_body(self.engine.registry().len()))
    }

    pub fn router(self: Arc<Self>) -> Router {
        let api = Router::new()
            .route("/api/v1/identify", get(identify_handler))
            .route("/api/v1/health", get(health_handler));
        let api = match &self.ui_dir {
            Some(dir) => api.fallback_service(ServeDir::new(dir)),
            None => api.route("/", get(placeholder_ui)),
        };
        api.with_state(self)
    }

    pub fn flush(&self) {
        if let Some(log) = &self.log {
            if let Err(e) = log.sync() {
                tracing::error!(error = %e, "cannot flush search log");
            }
        }
    }
}

async fn identify_handler(
    State(service): State<Arc<Service>>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResponse {
    service
        .identify(
            params.get("email").map(String::as_str),
            params.get("eps").map(String::as_str),
        )
        .await
}

async fn health_handler(State(service): State<Arc<Service>>) -> ApiResponse {
    service.health()
}

async fn placeholder_ui() -> Html<&'static str> {
    Html(include_str!("placeholder.html"))
}

/// Serves until `shutdown` resolves, then flushes the search log.
pub async fn serve(
    listener: TcpListener,
    service: Arc<Service>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = Arc::clone(&service).router();
    let result = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await;
    service.flush();
    result
}
