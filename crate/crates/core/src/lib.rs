//! Identify people on the web from an e-mail address.
//!
//! A lookup fans out to social-network and web-search providers, keeps the
//! first few results of each, extracts profile fields from social records
//! and blog pages, and merges them into one [`ConsolidatedIdentity`] by
//! majority vote with provider priority as tie-break.

pub mod bench;
pub mod clock;
pub mod config;
pub mod consolidate;
pub mod corpus;
pub mod engine;
pub mod model;
pub mod parse;
pub mod provider;
pub mod service;

pub use clock::{Clock, FixedClock, SystemClock};
pub use config::EngineConfig;
pub use consolidate::consolidate;
pub use engine::{Engine, EngineError, IdentifyHandle};
pub use model::{
    normalize_email, BlogProfile, ConsolidatedIdentity, EmailId, FieldResolution, Gender,
    InvalidEmail, ProfileQuadruple, SourceId, SourceKind, Threshold,
};
pub use parse::{classify_blog_candidate, extract_blog_profile, parse_social_item, FieldMappingRules};
pub use provider::{dispatch_all, ProviderDescriptor, Registry};
pub use service::{Service, ServiceConfig};
