//! The identification pipeline: dispatch, parse, extract, consolidate.

use std::sync::Arc;

use async_trait::async_trait;
use thiserror::Error;

use crate::clock::{Clock, SystemClock};
use crate::config::EngineConfig;
use crate::consolidate::consolidate;
use crate::model::{
    BlogProfile, ConsolidatedIdentity, EmailId, ProfileQuadruple, QueriedSource, SourceId,
    SourceKind, Threshold,
};
use crate::parse::{
    classify_blog_candidate, extract_blog_profile, parse_social_item, BlogHostPatterns,
    FieldMappingRules,
};
use crate::provider::{dispatch_all, ConfigError, DispatchError, Provider, Registry};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
}

/// Pipeline stages that consume provider items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Social items handed to the payload parser.
    SocialParse,
    /// Web items handed to the blog classifier.
    WebClassify,
    /// Pages fetched for blog-profile extraction.
    PageFetch,
}

/// Observes how many items of each provider reach each stage.
pub trait StageProbe: Send + Sync {
    fn observe(&self, stage: Stage, source: &SourceId, items: usize);
}

pub struct Engine {
    registry: Arc<Registry>,
    rules: FieldMappingRules,
    blog_hosts: BlogHostPatterns,
    default_eps: Threshold,
    clock: Arc<dyn Clock>,
    probe: Option<Arc<dyn StageProbe>>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("registry", &self.registry)
            .field("default_eps", &self.default_eps)
            .finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(registry: Registry) -> Self {
        Self {
            registry: Arc::new(registry),
            rules: FieldMappingRules::default(),
            blog_hosts: BlogHostPatterns::default(),
            default_eps: Threshold::DEFAULT,
            clock: Arc::new(SystemClock),
            probe: None,
        }
    }

    pub fn from_config(config: &EngineConfig, corpus_override: Option<&std::path::Path>) -> Result<Self, ConfigError> {
        Ok(Self::new(config.build_registry(corpus_override)?)
            .with_rules(config.field_mapping.clone())
            .with_blog_hosts(config.blog_hosts.clone())
            .with_default_eps(config.eps()))
    }

    pub fn with_rules(mut self, rules: FieldMappingRules) -> Self {
        self.rules = rules;
        self
    }

    pub fn with_blog_hosts(mut self, hosts: BlogHostPatterns) -> Self {
        self.blog_hosts = hosts;
        self
    }

    pub fn with_default_eps(mut self, eps: Threshold) -> Self {
        self.default_eps = eps;
        self
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_probe(mut self, probe: Arc<dyn StageProbe>) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn default_eps(&self) -> Threshold {
        self.default_eps
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    fn observe(&self, stage: Stage, source: &SourceId, items: usize) {
        if let Some(probe) = &self.probe {
            probe.observe(stage, source, items);
        }
    }

    /// Runs the full lookup for `email`. `eps` defaults to the configured
    /// threshold.
    pub async fn identify(
        &self,
        email: &EmailId,
        eps: Option<Threshold>,
    ) -> Result<ConsolidatedIdentity, EngineError> {
        let eps = eps.unwrap_or(self.default_eps);
        let responses =
            dispatch_all(&self.registry, email, eps, Arc::clone(&self.clock)).await?;

        let mut evidence: Vec<(SourceId, ProfileQuadruple)> = Vec::new();
        let mut page_jobs: Vec<(&Provider, String)> = Vec::new();
        for (response, provider) in responses.iter().zip(self.registry.providers()) {
            match response.source.kind {
                SourceKind::Social => {
                    self.observe(Stage::SocialParse, &response.source, response.social_items.len());
                    evidence.extend(response.social_items.iter().map(|item| {
                        (item.source.clone(), parse_social_item(item, &self.rules))
                    }));
                }
                SourceKind::Web => {
                    self.observe(Stage::WebClassify, &response.source, response.web_items.len());
                    let candidates: Vec<String> = response
                        .web_items
                        .iter()
                        .filter(|item| classify_blog_candidate(item, &self.blog_hosts))
                        .map(|item| item.url.clone())
                        .collect();
                    self.observe(Stage::PageFetch, &response.source, candidates.len());
                    page_jobs.extend(candidates.into_iter().map(|url| (provider.as_ref(), url)));
                }
            }
        }

        let pages = futures::future::join_all(page_jobs.iter().map(|(provider, url)| async move {
            match provider.page(url).await {
                Ok(Some(body)) => extract_blog_profile(&body, url),
                Ok(None) => None,
                Err(e) => {
                    tracing::debug!(provider = %provider.id(), %url, error = %e, "page fetch failed");
                    None
                }
            }
        }))
        .await;
        let blogs: Vec<BlogProfile> = pages.into_iter().flatten().collect();

        let queried = responses
            .into_iter()
            .map(|r| QueriedSource {
                source: r.source,
                priority: r.priority,
                status: r.status,
                latency_ms: r.latency_ms,
            })
            .collect();
        Ok(consolidate(
            email.clone(),
            &evidence,
            blogs,
            queried,
            self.clock.now(),
        ))
    }
}

/// Anything that can serve lookups, in-process or remote.
#[async_trait]
pub trait IdentifyHandle: Send + Sync {
    async fn identify(&self, email: &EmailId) -> Result<ConsolidatedIdentity, EngineError>;
}

#[async_trait]
impl IdentifyHandle for Engine {
    async fn identify(&self, email: &EmailId) -> Result<ConsolidatedIdentity, EngineError> {
        Engine::identify(self, email, None).await
    }
}
