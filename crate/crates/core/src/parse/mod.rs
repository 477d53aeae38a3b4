//! Turning raw provider results into profile data.

mod blog;
mod classify;
mod social;

pub use blog::{extract_blog_profile, extract_blog_profile_bytes};
pub use classify::{classify_blog_candidate, classify_url, BlogHostPatterns};
pub use social::parse_social_item;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("field mapping list {0:?} must not be empty")]
pub struct EmptyKeyList(pub &'static str);

/// Payload keys consulted for each quadruple slot, in priority order.
/// Matching is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRules")]
pub struct FieldMappingRules {
    name_keys: Vec<String>,
    gender_keys: Vec<String>,
    place_keys: Vec<String>,
    image_keys: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRules {
    #[serde(default = "defaults::name")]
    name_keys: Vec<String>,
    #[serde(default = "defaults::gender")]
    gender_keys: Vec<String>,
    #[serde(default = "defaults::place")]
    place_keys: Vec<String>,
    #[serde(default = "defaults::image")]
    image_keys: Vec<String>,
}

mod defaults {
    fn owned(keys: &[&str]) -> Vec<String> {
        keys.iter().map(|k| k.to_string()).collect()
    }

    pub fn name() -> Vec<String> {
        owned(&["name", "full_name", "display_name"])
    }

    pub fn gender() -> Vec<String> {
        owned(&["gender", "sex"])
    }

    pub fn place() -> Vec<String> {
        owned(&["location", "place", "city", "locality"])
    }

    pub fn image() -> Vec<String> {
        owned(&["image", "avatar", "picture_url", "photo"])
    }
}

impl TryFrom<RawRules> for FieldMappingRules {
    type Error = EmptyKeyList;

    fn try_from(raw: RawRules) -> Result<Self, Self::Error> {
        Self::new(raw.name_keys, raw.gender_keys, raw.place_keys, raw.image_keys)
    }
}

impl FieldMappingRules {
    pub fn new(
        name_keys: Vec<String>,
        gender_keys: Vec<String>,
        place_keys: Vec<String>,
        image_keys: Vec<String>,
    ) -> Result<Self, EmptyKeyList> {
        for (label, keys) in [
            ("name_keys", &name_keys),
            ("gender_keys", &gender_keys),
            ("place_keys", &place_keys),
            ("image_keys", &image_keys),
        ] {
            if keys.is_empty() {
                return Err(EmptyKeyList(label));
            }
        }
        Ok(Self {
            name_keys,
            gender_keys,
            place_keys,
            image_keys,
        })
    }

    pub fn name_keys(&self) -> &[String] {
        &self.name_keys
    }

    pub fn gender_keys(&self) -> &[String] {
        &self.gender_keys
    }

    pub fn place_keys(&self) -> &[String] {
        &self.place_keys
    }

    pub fn image_keys(&self) -> &[String] {
        &self.image_keys
    }
}

impl Default for FieldMappingRules {
    fn default() -> Self {
        Self {
            name_keys: defaults::name(),
            gender_keys: defaults::gender(),
            place_keys: defaults::place(),
            image_keys: defaults::image(),
        }
    }
}
