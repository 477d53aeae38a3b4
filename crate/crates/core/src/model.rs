//! Domain types shared by every stage of the identification pipeline.
//!
//! Values are immutable once built: constructors enforce the invariants
//! and the fields of constrained types are only reachable through getters.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::num::NonZeroU32;

use chrono::{DateTime, Utc};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

/// Why an address was rejected by [`normalize_email`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EmailRejection {
    #[error("input is empty")]
    Empty,
    #[error("missing '@'")]
    MissingAt,
    #[error("more than one '@'")]
    ExtraAt,
    #[error("empty local part")]
    EmptyLocal,
    #[error("empty domain part")]
    EmptyDomain,
    #[error("domain has no '.'")]
    DomainWithoutDot,
    #[error("domain has an empty label")]
    EmptyDomainLabel,
    #[error("contains whitespace")]
    Whitespace,
    #[error("contains a path separator or control character")]
    ForbiddenCharacter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("invalid e-mail address: {reason}")]
pub struct InvalidEmail {
    pub reason: EmailRejection,
}

/// A validated e-mail address, the unique key of every lookup.
///
/// Equality and hashing only look at the normalized form, so addresses that
/// differ in letter case or surrounding whitespace compare equal.
#[derive(Debug, Clone)]
pub struct EmailId {
    raw: String,
    normalized: String,
}

impl EmailId {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    pub fn local_part(&self) -> &str {
        self.normalized.split('@').next().unwrap_or_default()
    }

    pub fn domain(&self) -> &str {
        self.normalized.rsplit('@').next().unwrap_or_default()
    }
}

impl PartialEq for EmailId {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for EmailId {}

impl Hash for EmailId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized.hash(state);
    }
}

impl fmt::Display for EmailId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.normalized)
    }
}

impl std::str::FromStr for EmailId {
    type Err = InvalidEmail;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_email(s)
    }
}

/// Validates `raw` and derives its canonical lookup key (trimmed, lower-cased).
///
/// Besides the address shape rules, `/`, `\` and control characters are
/// rejected because the normalized form doubles as a fixture file name.
pub fn normalize_email(raw: &str) -> Result<EmailId, InvalidEmail> {
    let reject = |reason| Err(InvalidEmail { reason });
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return reject(EmailRejection::Empty);
    }
    if trimmed.chars().any(char::is_whitespace) {
        return reject(EmailRejection::Whitespace);
    }
    if trimmed
        .chars()
        .any(|c| c == '/' || c == '\\' || c.is_control())
    {
        return reject(EmailRejection::ForbiddenCharacter);
    }
    let mut parts = trimmed.split('@');
    let (local, domain) = match (parts.next(), parts.next(), parts.next()) {
        (Some(_), None, _) => return reject(EmailRejection::MissingAt),
        (Some(local), Some(domain), None) => (local, domain),
        _ => return reject(EmailRejection::ExtraAt),
    };
    if local.is_empty() {
        return reject(EmailRejection::EmptyLocal);
    }
    if domain.is_empty() {
        return reject(EmailRejection::EmptyDomain);
    }
    if !domain.contains('.') {
        return reject(EmailRejection::DomainWithoutDot);
    }
    if domain.split('.').any(str::is_empty) {
        return reject(EmailRejection::EmptyDomainLabel);
    }
    Ok(EmailId {
        raw: raw.to_owned(),
        normalized: trimmed.to_lowercase(),
    })
}

/// Upper bound on any per-provider result count.
pub const MAX_EPS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("threshold {value} outside [1, {max}]")]
pub struct InvalidThreshold {
    pub value: i64,
    pub max: u32,
}

/// Number of top-ranked results retained per provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u32")]
pub struct Threshold(NonZeroU32);

impl Threshold {
    pub const DEFAULT: Threshold = Threshold(NonZeroU32::new(10).unwrap());

    pub fn new(value: i64) -> Result<Self, InvalidThreshold> {
        Self::with_bound(value, MAX_EPS)
    }

    pub fn with_bound(value: i64, max: u32) -> Result<Self, InvalidThreshold> {
        let max = max.min(MAX_EPS);
        if value < 1 || value > i64::from(max) {
            return Err(InvalidThreshold { value, max });
        }
        Ok(Threshold(NonZeroU32::new(value as u32).expect("checked above")))
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    pub fn as_usize(self) -> usize {
        self.0.get() as usize
    }

    /// The tighter of two limits.
    pub fn min(self, other: Option<Threshold>) -> Threshold {
        match other {
            Some(o) if o < self => o,
            _ => self,
        }
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<i64> for Threshold {
    type Error = InvalidThreshold;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        Threshold::new(value)
    }
}

impl From<Threshold> for u32 {
    fn from(t: Threshold) -> u32 {
        t.get()
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Social,
    Web,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Social => "social",
            SourceKind::Web => "web",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identifies one registered provider.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceId {
    pub kind: SourceKind,
    pub provider_name: String,
}

impl SourceId {
    pub fn new(kind: SourceKind, provider_name: impl Into<String>) -> Self {
        Self {
            kind,
            provider_name: provider_name.into(),
        }
    }

    pub fn social(provider_name: impl Into<String>) -> Self {
        Self::new(SourceKind::Social, provider_name)
    }

    pub fn web(provider_name: impl Into<String>) -> Self {
        Self::new(SourceKind::Web, provider_name)
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.provider_name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    #[default]
    Unspecified,
}

impl Gender {
    /// Maps the usual spellings onto the closed gender set; anything else is
    /// `Unspecified`.
    pub fn from_label(label: &str) -> Gender {
        match label.trim().to_lowercase().as_str() {
            "m" | "male" | "man" => Gender::Male,
            "f" | "female" | "woman" => Gender::Female,
            _ => Gender::Unspecified,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unspecified => "unspecified",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Returns the trimmed text, or `None` when nothing is left.
pub(crate) fn non_blank(value: &str) -> Option<String> {
    let trimmed = value.trim();
    (!trimmed.is_empty()).then(|| trimmed.to_owned())
}

/// Parses `value` as an absolute `http`/`https` URL.
pub fn absolute_http_url(value: &str) -> Option<Url> {
    let url = Url::parse(value.trim()).ok()?;
    matches!(url.scheme(), "http" | "https")
        .then_some(url)
        .filter(|u| u.host_str().is_some_and(|h| !h.is_empty()))
}

/// Name, gender, place and image extracted from one social result.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ProfileQuadruple {
    name: Option<String>,
    gender: Gender,
    place: Option<String>,
    image: Option<String>,
}

impl ProfileQuadruple {
    /// Blank names and places are dropped, as are images that are not
    /// absolute http(s) URLs.
    pub fn new(
        name: Option<&str>,
        gender: Gender,
        place: Option<&str>,
        image: Option<&str>,
    ) -> Self {
        Self {
            name: name.and_then(non_blank),
            gender,
            place: place.and_then(non_blank),
            image: image
                .and_then(absolute_http_url)
                .map(|_| image.unwrap_or_default().trim().to_owned()),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn gender(&self) -> Gender {
        self.gender
    }

    pub fn place(&self) -> Option<&str> {
        self.place.as_deref()
    }

    pub fn image(&self) -> Option<&str> {
        self.image.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.name.is_none()
            && self.gender == Gender::Unspecified
            && self.place.is_none()
            && self.image.is_none()
    }
}

/// One raw result returned by a social provider.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocialResultItem {
    pub source: SourceId,
    pub rank: u32,
    pub payload: serde_json::Map<String, serde_json::Value>,
}

/// One ranked hit returned by a web search provider.
///
/// `url` keeps the exact text the backend returned; it has been checked to
/// be an absolute http(s) URL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WebResultItem {
    pub source: SourceId,
    pub rank: u32,
    pub url: String,
    pub title: String,
    pub snippet: String,
}

/// Person details extracted from a blog page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlogProfile {
    url: String,
    display_name: Option<String>,
    location: Option<String>,
    avatar_url: Option<String>,
    about: Option<String>,
}

impl BlogProfile {
    /// Returns `None` when every descriptive field is blank.
    pub fn new(
        url: impl Into<String>,
        display_name: Option<String>,
        location: Option<String>,
        avatar_url: Option<String>,
        about: Option<String>,
    ) -> Option<Self> {
        let clean = |v: Option<String>| v.as_deref().and_then(non_blank);
        let profile = Self {
            url: url.into(),
            display_name: clean(display_name),
            location: clean(location),
            avatar_url: avatar_url
                .as_deref()
                .and_then(absolute_http_url)
                .map(String::from),
            about: clean(about),
        };
        (profile.display_name.is_some()
            || profile.location.is_some()
            || profile.avatar_url.is_some()
            || profile.about.is_some())
        .then_some(profile)
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn display_name(&self) -> Option<&str> {
        self.display_name.as_deref()
    }

    pub fn location(&self) -> Option<&str> {
        self.location.as_deref()
    }

    pub fn avatar_url(&self) -> Option<&str> {
        self.avatar_url.as_deref()
    }

    pub fn about(&self) -> Option<&str> {
        self.about.as_deref()
    }
}

/// A value together with the sources that reported it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alternative {
    pub value: String,
    pub sources: Vec<SourceId>,
}

/// The outcome of resolving one profile field across sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldResolution {
    value: String,
    supporting_sources: Vec<SourceId>,
    alternatives: Vec<Alternative>,
}

impl FieldResolution {
    /// Callers guarantee `supporting_sources` is non-empty and that no
    /// alternative carries the winning value.
    pub(crate) fn new(
        value: String,
        supporting_sources: Vec<SourceId>,
        alternatives: Vec<Alternative>,
    ) -> Self {
        debug_assert!(!supporting_sources.is_empty());
        Self {
            value,
            supporting_sources,
            alternatives,
        }
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    pub fn supporting_sources(&self) -> &[SourceId] {
        &self.supporting_sources
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    /// Support of the winner over all votes cast for the field.
    pub fn confidence(&self) -> Ratio<usize> {
        let support = self.supporting_sources.len();
        let rest: usize = self.alternatives.iter().map(|a| a.sources.len()).sum();
        Ratio::new(support, support + rest)
    }

    pub fn confidence_f64(&self) -> f64 {
        let c = self.confidence();
        *c.numer() as f64 / *c.denom() as f64
    }
}

/// Final status of one provider for one lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseStatus {
    Ok,
    Timeout,
    Error,
    Empty,
}

impl ResponseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ResponseStatus::Ok => "ok",
            ResponseStatus::Timeout => "timeout",
            ResponseStatus::Error => "error",
            ResponseStatus::Empty => "empty",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, ResponseStatus::Timeout | ResponseStatus::Error)
    }
}

impl fmt::Display for ResponseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A provider that took part in a lookup and how it went.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueriedSource {
    pub source: SourceId,
    pub priority: u32,
    pub status: ResponseStatus,
    pub latency_ms: u64,
}

/// The merged identity for one e-mail address.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsolidatedIdentity {
    email: EmailId,
    name: Option<FieldResolution>,
    gender: Option<FieldResolution>,
    place: Option<FieldResolution>,
    image: Option<FieldResolution>,
    blog_profiles: Vec<BlogProfile>,
    sources_queried: Vec<QueriedSource>,
    summary_success: bool,
    blog_success: bool,
    generated_at: DateTime<Utc>,
}

/// The four resolved quadruple slots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResolvedFields {
    pub name: Option<FieldResolution>,
    pub gender: Option<FieldResolution>,
    pub place: Option<FieldResolution>,
    pub image: Option<FieldResolution>,
}

impl ConsolidatedIdentity {
    /// Success flags are derived here and nowhere else.
    pub(crate) fn new(
        email: EmailId,
        fields: ResolvedFields,
        blog_profiles: Vec<BlogProfile>,
        sources_queried: Vec<QueriedSource>,
        generated_at: DateTime<Utc>,
    ) -> Self {
        let summary_success = fields.name.is_some();
        let blog_success = !blog_profiles.is_empty();
        Self {
            email,
            name: fields.name,
            gender: fields.gender,
            place: fields.place,
            image: fields.image,
            blog_profiles,
            sources_queried,
            summary_success,
            blog_success,
            generated_at,
        }
    }

    pub fn email(&self) -> &EmailId {
        &self.email
    }

    pub fn name(&self) -> Option<&FieldResolution> {
        self.name.as_ref()
    }

    pub fn gender(&self) -> Option<&FieldResolution> {
        self.gender.as_ref()
    }

    pub fn place(&self) -> Option<&FieldResolution> {
        self.place.as_ref()
    }

    pub fn image(&self) -> Option<&FieldResolution> {
        self.image.as_ref()
    }

    pub fn blog_profiles(&self) -> &[BlogProfile] {
        &self.blog_profiles
    }

    pub fn sources_queried(&self) -> &[QueriedSource] {
        &self.sources_queried
    }

    pub fn summary_success(&self) -> bool {
        self.summary_success
    }

    pub fn blog_success(&self) -> bool {
        self.blog_success
    }

    pub fn generated_at(&self) -> DateTime<Utc> {
        self.generated_at
    }

    /// True when every provider timed out or errored.
    pub fn all_providers_failed(&self) -> bool {
        !self.sources_queried.is_empty()
            && self.sources_queried.iter().all(|s| s.status.is_failure())
    }
}
