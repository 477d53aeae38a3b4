use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use async_trait::async_trait;

use super::{Backend, BackendError, RawWebHit, WebQuery};
use crate::corpus::{page_path, social_fixture_path, web_index_path, WebIndexEntry};
use crate::model::EmailId;

/// Serves results from a local fixture corpus.
///
/// A missing record file (or index key) means the provider knows nothing
/// about the address; malformed JSON is a backend error.
#[derive(Debug, Clone)]
pub struct FixtureBackend {
    root: PathBuf,
    provider: String,
}

impl FixtureBackend {
    pub fn new(root: &Path, provider: &str) -> Self {
        Self {
            root: root.to_path_buf(),
            provider: provider.to_owned(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

async fn read_optional(path: &Path) -> Result<Option<Vec<u8>>, BackendError> {
    match tokio::fs::read(path).await {
        Ok(bytes) => Ok(Some(bytes)),
        Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[async_trait]
impl Backend for FixtureBackend {
    async fn social(
        &self,
        email: &EmailId,
        _limit: usize,
    ) -> Result<Vec<serde_json::Value>, BackendError> {
        let path = social_fixture_path(&self.root, &self.provider, email);
        let Some(bytes) = read_optional(&path).await? else {
            return Ok(Vec::new());
        };
        match serde_json::from_slice(&bytes) {
            Ok(serde_json::Value::Array(items)) => Ok(items),
            Ok(_) => Err(BackendError::Malformed(format!(
                "{}: root is not an array",
                path.display()
            ))),
            Err(e) => Err(BackendError::Malformed(format!("{}: {e}", path.display()))),
        }
    }

    async fn web(&self, query: &WebQuery, _limit: usize) -> Result<Vec<RawWebHit>, BackendError> {
        let path = web_index_path(&self.root, &self.provider);
        let Some(bytes) = read_optional(&path).await? else {
            return Ok(Vec::new());
        };
        let index: serde_json::Map<String, serde_json::Value> = serde_json::from_slice(&bytes)
            .map_err(|e| BackendError::Malformed(format!("{}: {e}", path.display())))?;
        let Some(entries) = index.get(query.email.normalized()) else {
            return Ok(Vec::new());
        };
        let entries = entries.as_array().ok_or_else(|| {
            BackendError::Malformed(format!(
                "{}: entry for {} is not an array",
                path.display(),
                query.email
            ))
        })?;
        // Entries that do not even have the right shape count as malformed
        // hits and are dropped like unparseable URLs.
        Ok(entries
            .iter()
            .filter_map(|e| serde_json::from_value::<WebIndexEntry>(e.clone()).ok())
            .map(|e| RawWebHit {
                url: e.url,
                title: e.title,
                snippet: e.snippet,
            })
            .collect())
    }

    async fn page(&self, url: &str) -> Result<Option<String>, BackendError> {
        let bytes = read_optional(&page_path(&self.root, url)).await?;
        Ok(bytes.map(|b| String::from_utf8_lossy(&b).into_owned()))
    }
}
