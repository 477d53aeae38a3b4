//! Engine configuration file.
//!
//! ```json
//! {
//!   "eps": 10,
//!   "corpus": "corpus",
//!   "providers": "providers.json",
//!   "field_mapping": { "name_keys": ["name", "full_name", "display_name"] },
//!   "blog_hosts": ["blog", "blogspot.", "wordpress.", "livejournal."],
//!   "cache_ttl_s": 3600
//! }
//! ```
//!
//! `providers` is either an inline array of provider descriptors or the path
//! of a JSON file holding that array. Without it, one fixture provider is
//! registered per directory of the corpus. Relative paths resolve against the
//! directory of the file that mentions them.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::parse::{BlogHostPatterns, FieldMappingRules};
use crate::provider::{BackendSpec, ConfigError, ProviderDescriptor, Registry};
use crate::model::Threshold;

pub const DEFAULT_CACHE_TTL_S: u64 = 3600;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProvidersSpec {
    Inline(Vec<ProviderDescriptor>),
    File(PathBuf),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default)]
    pub eps: Option<Threshold>,
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub providers: Option<ProvidersSpec>,
    #[serde(default)]
    pub field_mapping: FieldMappingRules,
    #[serde(default)]
    pub blog_hosts: BlogHostPatterns,
    #[serde(default)]
    pub cache_ttl_s: Option<u64>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn anchor(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn anchor_fixtures(base: &Path, descriptors: &mut [ProviderDescriptor]) {
    for d in descriptors {
        if let BackendSpec::Fixture {
            corpus_path: Some(p),
        } = &mut d.backend
        {
            *p = anchor(base, p);
        }
    }
}

/// Reads a provider config file (a JSON array of descriptors).
pub fn load_provider_file(path: &Path) -> Result<Vec<ProviderDescriptor>, ConfigError> {
    let mut descriptors: Vec<ProviderDescriptor> = read_json(path)?;
    anchor_fixtures(path.parent().unwrap_or(Path::new(".")), &mut descriptors);
    Ok(descriptors)
}

impl EngineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut config: EngineConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.corpus = config.corpus.map(|c| anchor(base, &c));
        config.providers = match config.providers {
            Some(ProvidersSpec::File(p)) => {
                Some(ProvidersSpec::Inline(load_provider_file(&anchor(base, &p))?))
            }
            Some(ProvidersSpec::Inline(mut ds)) => {
                anchor_fixtures(base, &mut ds);
                Some(ProvidersSpec::Inline(ds))
            }
            None => None,
        };
        Ok(config)
    }

    /// Fixture providers without an explicit corpus use `corpus_override`,
    /// falling back to the configured corpus.
    pub fn build_registry(&self, corpus_override: Option<&Path>) -> Result<Registry, ConfigError> {
        let corpus = corpus_override.or(self.corpus.as_deref());
        match &self.providers {
            Some(ProvidersSpec::Inline(ds)) => Registry::from_descriptors(ds.clone(), corpus),
            Some(ProvidersSpec::File(p)) => Registry::from_descriptors(load_provider_file(p)?, corpus),
            None => match corpus {
                Some(c) => Registry::discover(c),
                None => Err(ConfigError::MissingCorpus("<discovery>".into())),
            },
        }
    }

    pub fn eps(&self) -> Threshold {
        self.eps.unwrap_or_default()
    }

    pub fn cache_ttl_s(&self) -> u64 {
        self.cache_ttl_s.unwrap_or(DEFAULT_CACHE_TTL_S)
    }
}
