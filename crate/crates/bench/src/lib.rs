//! Fixtures shared by the benchmarks.

use biblioguard_core::config::RuleConfig;
use biblioguard_core::synth::SynthCorpus;
use biblioguard_core::{Resolver, ValidateOptions};
use std::collections::BTreeSet;
use std::sync::Arc;

/// Registry answering from the identifiers a synthetic corpus registered.
pub struct SetResolver(pub BTreeSet<String>);

impl Resolver for SetResolver {
    fn source(&self, scheme: &str) -> Option<String> {
        Some(format!("{scheme}.bench"))
    }

    fn lookup(&self, scheme: &str, value: &str) -> Result<bool, String> {
        Ok(self.0.contains(&format!("{scheme}:{value}")))
    }
}

/// Options for validating `corpus` without network access or rate limits.
pub fn options_for(corpus: &SynthCorpus) -> ValidateOptions {
    let mut config = RuleConfig::default();
    config.limits.per_host_per_second = 0.0;
    ValidateOptions::with_resolver(config, Arc::new(SetResolver(corpus.registered.clone())))
}
