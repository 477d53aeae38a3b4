use serde::{Deserialize, Serialize};
use url::Url;

use crate::model::WebResultItem;

/// Host substrings that mark a web hit as a blog page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlogHostPatterns(Vec<String>);

impl BlogHostPatterns {
    pub fn new(patterns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self(
            patterns
                .into_iter()
                .map(|p| p.into().to_lowercase())
                .filter(|p| !p.is_empty())
                .collect(),
        )
    }

    pub fn patterns(&self) -> &[String] {
        &self.0
    }

    pub fn matches_host(&self, host: &str) -> bool {
        let host = host.to_lowercase();
        self.0.iter().any(|p| host.contains(&p.to_lowercase()))
    }
}

impl Default for BlogHostPatterns {
    fn default() -> Self {
        Self::new(["blog", "blogspot.", "wordpress.", "livejournal."])
    }
}

/// Whether the hit's page should be fetched for blog-profile extraction.
pub fn classify_blog_candidate(item: &WebResultItem, patterns: &BlogHostPatterns) -> bool {
    classify_url(&item.url, patterns)
}

/// True iff the host matches a pattern or the path contains `/profile`.
pub fn classify_url(url: &str, patterns: &BlogHostPatterns) -> bool {
    let Ok(url) = Url::parse(url) else {
        return false;
    };
    url.host_str().is_some_and(|h| patterns.matches_host(h)) || url.path().contains("/profile")
}
