//! Rule configuration shared by all validation levels.
//!
//! Every field is optional in the JSON file; omitted fields keep the
//! built-in defaults. See `docs/config.md` for the file format.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Prefix of the environment variables overriding resolver endpoints,
/// e.g. `BIBLIOGUARD_RESOLVER_DOI=http://localhost:8080/{value}`.
pub const RESOLVER_ENV_PREFIX: &str = "BIBLIOGUARD_RESOLVER_";
/// Directory holding the persistent existence cache.
pub const CACHE_DIR_ENV: &str = "BIBLIOGUARD_CACHE_DIR";

pub const CACHE_FILE_NAME: &str = "existence-cache.json";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read configuration {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheSettings {
    /// Cache file; `None` keeps the cache in memory only.
    pub path: Option<PathBuf>,
    pub ttl_days: u64,
}

impl Default for CacheSettings {
    fn default() -> Self {
        CacheSettings {
            path: None,
            ttl_days: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LookupLimits {
    pub max_in_flight: usize,
    /// Requests per second per registry host; 0 disables the limit.
    pub per_host_per_second: f64,
    pub timeout_secs: u64,
}

impl Default for LookupLimits {
    fn default() -> Self {
        LookupLimits {
            max_in_flight: 8,
            per_host_per_second: 4.0,
            timeout_secs: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleConfig {
    /// Schemes allowed for bibliographic resources (id columns, venues).
    pub br_schemes: BTreeSet<String>,
    /// Schemes allowed for responsible agents (author, editor, publisher).
    pub ra_schemes: BTreeSet<String>,
    pub type_vocabulary: BTreeSet<String>,
    /// Publication type → identifier schemes allowed in the id column.
    pub type_id_compatibility: BTreeMap<String, BTreeSet<String>>,
    /// Types for which a venue is suspicious.
    pub containerless_types: BTreeSet<String>,
    /// Scheme → URL template with a `{value}` placeholder.
    pub resolvers: BTreeMap<String, String>,
    pub offline: bool,
    pub cache: CacheSettings,
    pub limits: LookupLimits,
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const ARTICLE_IDS: &[&str] = &["doi", "pmid", "pmcid", "wikidata", "openalex", "url", "arxiv"];
const BOOK_IDS: &[&str] = &["doi", "pmid", "pmcid", "wikidata", "openalex", "url", "arxiv", "isbn"];
const DATA_IDS: &[&str] = &["doi", "wikidata", "openalex", "url"];
const JOURNAL_IDS: &[&str] = &["issn", "wikidata", "openalex"];
const SERIES_IDS: &[&str] = &["issn", "isbn", "wikidata", "openalex", "url"];

const TYPE_GROUPS: &[(&[&str], &[&str])] = &[
    (
        &[
            "journal article",
            "proceedings article",
            "newspaper article",
            "book chapter",
            "book part",
            "book section",
            "reference entry",
            "editorial",
            "abstract",
            "peer review",
            "preprint",
            "retraction notice",
        ],
        ARTICLE_IDS,
    ),
    (
        &[
            "book",
            "book set",
            "reference book",
            "proceedings",
            "dissertation",
            "report",
            "standard",
        ],
        BOOK_IDS,
    ),
    (
        &[
            "dataset",
            "data file",
            "data management plan",
            "computer program",
            "web content",
            "audio document",
            "archival document",
            "presentation",
            "journal volume",
            "journal issue",
            "newspaper issue",
        ],
        DATA_IDS,
    ),
    (&["journal"], JOURNAL_IDS),
    (
        &[
            "series",
            "book series",
            "proceedings series",
            "report series",
            "standard series",
            "newspaper",
        ],
        SERIES_IDS,
    ),
];

impl Default for RuleConfig {
    fn default() -> Self {
        let mut compat = BTreeMap::new();
        for (types, ids) in TYPE_GROUPS {
            for t in *types {
                compat.insert(t.to_string(), set(ids));
            }
        }
        RuleConfig {
            br_schemes: set(&[
                "doi", "pmid", "pmcid", "issn", "isbn", "wikidata", "openalex", "url", "jid", "arxiv",
            ]),
            ra_schemes: set(&["orcid", "viaf", "crossref", "wikidata", "ror"]),
            type_vocabulary: compat.keys().cloned().collect(),
            type_id_compatibility: compat,
            containerless_types: set(&["book", "report"]),
            resolvers: crate::idcheck::default_resolvers(),
            offline: false,
            cache: CacheSettings::default(),
            limits: LookupLimits::default(),
        }
    }
}

impl RuleConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: RuleConfig = serde_json::from_slice(&bytes).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.check()?;
        Ok(config)
    }

    /// Apply resolver and cache overrides from environment variables.
    pub fn apply_env(&mut self) {
        self.apply_env_from(std::env::vars());
    }

    pub fn apply_env_from(&mut self, vars: impl IntoIterator<Item = (String, String)>) {
        for (key, value) in vars {
            if let Some(scheme) = key.strip_prefix(RESOLVER_ENV_PREFIX) {
                self.resolvers.insert(scheme.to_ascii_lowercase(), value);
            } else if key == CACHE_DIR_ENV && !value.is_empty() {
                self.cache.path = Some(PathBuf::from(value).join(CACHE_FILE_NAME));
            }
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.br_schemes.is_empty() || self.ra_schemes.is_empty() {
            return Err(ConfigError::Invalid(
                "br_schemes and ra_schemes must not be empty".into(),
            ));
        }
        if let Some(t) = self
            .type_vocabulary
            .iter()
            .find(|t| !self.type_id_compatibility.contains_key(*t))
        {
            return Err(ConfigError::Invalid(format!(
                "type '{t}' has no entry in type_id_compatibility"
            )));
        }
        for (t, schemes) in &self.type_id_compatibility {
            if let Some(s) = schemes.iter().find(|s| !self.br_schemes.contains(*s)) {
                return Err(ConfigError::Invalid(format!(
                    "type '{t}' allows scheme '{s}', which is not in br_schemes"
                )));
            }
        }
        if let Some((scheme, _)) = self.resolvers.iter().find(|(_, t)| !t.contains("{value}")) {
            return Err(ConfigError::Invalid(format!(
                "resolver template for '{scheme}' lacks the {{value}} placeholder"
            )));
        }
        if self.limits.max_in_flight == 0 {
            return Err(ConfigError::Invalid("limits.max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}
