//! JSON body of `GET /api/v1/identify`.
//!
//! The CLI prints exactly the same bytes, so both go through
//! [`identify_body`].

use chrono::SecondsFormat;
use serde::Serialize;

use crate::model::{BlogProfile, ConsolidatedIdentity, FieldResolution, SourceId};

#[derive(Serialize)]
struct Body<'a> {
    email: &'a str,
    cached: bool,
    summary: Summary,
    blog_profiles: Vec<BlogProfileJson<'a>>,
    sources: Vec<SourceJson<'a>>,
    summary_success: bool,
    blog_success: bool,
    generated_at: String,
}

#[derive(Serialize)]
struct Summary {
    name: Option<FieldResolutionJson>,
    gender: Option<FieldResolutionJson>,
    place: Option<FieldResolutionJson>,
    image: Option<FieldResolutionJson>,
}

#[derive(Serialize)]
struct FieldResolutionJson {
    value: String,
    sources: Vec<String>,
    confidence: f64,
    alternatives: Vec<AlternativeJson>,
}

#[derive(Serialize)]
struct AlternativeJson {
    value: String,
    sources: Vec<String>,
}

#[derive(Serialize)]
struct BlogProfileJson<'a> {
    url: &'a str,
    display_name: Option<&'a str>,
    location: Option<&'a str>,
    avatar_url: Option<&'a str>,
    about: Option<&'a str>,
}

#[derive(Serialize)]
struct SourceJson<'a> {
    provider: &'a str,
    kind: &'static str,
    status: &'static str,
    latency_ms: u64,
}

fn names(sources: &[SourceId]) -> Vec<String> {
    sources.iter().map(|s| s.provider_name.clone()).collect()
}

fn field(f: Option<&FieldResolution>) -> Option<FieldResolutionJson> {
    f.map(|f| FieldResolutionJson {
        value: f.value().to_owned(),
        sources: names(f.supporting_sources()),
        confidence: f.confidence_f64(),
        alternatives: f
            .alternatives()
            .iter()
            .map(|a| AlternativeJson {
                value: a.value.clone(),
                sources: names(&a.sources),
            })
            .collect(),
    })
}

fn blog(b: &BlogProfile) -> BlogProfileJson<'_> {
    BlogProfileJson {
        url: b.url(),
        display_name: b.display_name(),
        location: b.location(),
        avatar_url: b.avatar_url(),
        about: b.about(),
    }
}

/// Serializes an identity as the identify response body.
pub fn identify_body(identity: &ConsolidatedIdentity, cached: bool) -> String {
    let body = Body {
        email: identity.email().normalized(),
        cached,
        summary: Summary {
            name: field(identity.name()),
            gender: field(identity.gender()),
            place: field(identity.place()),
            image: field(identity.image()),
        },
        blog_profiles: identity.blog_profiles().iter().map(blog).collect(),
        sources: identity
            .sources_queried()
            .iter()
            .map(|s| SourceJson {
                provider: &s.source.provider_name,
                kind: s.source.kind.as_str(),
                status: s.status.as_str(),
                latency_ms: s.latency_ms,
            })
            .collect(),
        summary_success: identity.summary_success(),
        blog_success: identity.blog_success(),
        generated_at: identity
            .generated_at()
            .to_rfc3339_opts(SecondsFormat::Millis, true),
    };
    serde_json::to_string(&body).expect("identify body serializes")
}

pub fn error_body(code: &str) -> String {
    serde_json::json!({ "error": code }).to_string()
}

pub fn health_body(providers: usize) -> String {
    serde_json::json!({ "status": "ok", "providers": providers }).to_string()
}
