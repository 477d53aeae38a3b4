//! On-disk fixture corpus layout.
//!
//! ```text
//! <corpus>/social/<provider>/<normalized-email>.json   array of payload objects
//! <corpus>/web/<provider>/index.json                   { email: [{url, title, snippet}] }
//! <corpus>/pages/<sha1-of-url>.html                    stored page bodies
//! ```

mod replica;
mod validate;

pub use replica::{write_table1_replica, ReplicaSession, REPLICA_DOMAIN};
pub use validate::{validate_corpus, Violation};

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::model::EmailId;

pub const SOCIAL_DIR: &str = "social";
pub const WEB_DIR: &str = "web";
pub const PAGES_DIR: &str = "pages";
pub const WEB_INDEX_FILE: &str = "index.json";

/// One entry of a web provider's fixture index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WebIndexEntry {
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub snippet: String,
}

impl WebIndexEntry {
    pub fn new(url: impl Into<String>, title: impl Into<String>, snippet: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            title: title.into(),
            snippet: snippet.into(),
        }
    }
}

/// `<sha1-hex>.html` for the exact URL text.
pub fn page_file_name(url: &str) -> String {
    format!("{:x}.html", Sha1::digest(url.as_bytes()))
}

pub fn social_fixture_path(root: &Path, provider: &str, email: &EmailId) -> PathBuf {
    root.join(SOCIAL_DIR)
        .join(provider)
        .join(format!("{}.json", email.normalized()))
}

pub fn web_index_path(root: &Path, provider: &str) -> PathBuf {
    root.join(WEB_DIR).join(provider).join(WEB_INDEX_FILE)
}

pub fn page_path(root: &Path, url: &str) -> PathBuf {
    root.join(PAGES_DIR).join(page_file_name(url))
}

/// Writes fixture files in the corpus layout.
#[derive(Debug, Clone)]
pub struct CorpusWriter {
    root: PathBuf,
}

impl CorpusWriter {
    pub fn new(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_social(
        &self,
        provider: &str,
        email: &EmailId,
        payloads: &[serde_json::Value],
    ) -> io::Result<PathBuf> {
        let path = social_fixture_path(&self.root, provider, email);
        write_json(&path, &payloads)?;
        Ok(path)
    }

    /// Ensures a provider directory exists even when it holds no records.
    pub fn ensure_social_provider(&self, provider: &str) -> io::Result<()> {
        std::fs::create_dir_all(self.root.join(SOCIAL_DIR).join(provider))
    }

    pub fn write_web_index(
        &self,
        provider: &str,
        index: &BTreeMap<String, Vec<WebIndexEntry>>,
    ) -> io::Result<PathBuf> {
        let path = web_index_path(&self.root, provider);
        write_json(&path, index)?;
        Ok(path)
    }

    pub fn write_page(&self, url: &str, html: &str) -> io::Result<PathBuf> {
        let path = page_path(&self.root, url);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, html)?;
        Ok(path)
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}
