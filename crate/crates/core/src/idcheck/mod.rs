//! Identifier checks: issuing-organisation syntax (level 2) and registry
//! existence (level 3).

pub mod checksum;
mod existence;
mod syntax;

pub use existence::{
    check_id_existence, resolve_batch, HttpResolver, IdKey, LookupCache, RateLimiter, RegistryVerdict, Resolver,
    VerdictStatus,
};
pub use syntax::{scheme_spec, validate_id_syntax, IdRole, IdSyntaxError, SchemeSpec, SCHEMES};

use std::collections::BTreeMap;

/// Default resolver templates keyed by scheme.
pub fn default_resolvers() -> BTreeMap<String, String> {
    SCHEMES
        .iter()
        .filter_map(|s| s.resolver.map(|r| (s.scheme.to_string(), r.to_string())))
        .collect()
}
