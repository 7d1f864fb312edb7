mod support;

use biblioguard_core::config::LookupLimits;
use biblioguard_core::idcheck::{resolve_batch, HttpResolver, IdKey, LookupCache, VerdictStatus};
use biblioguard_core::{parse_table, validate_table, ErrorLabel, ValidateOptions};
use std::collections::BTreeSet;
use std::time::{Duration, Instant};
use support::MockRegistry;

fn key(scheme: &str, value: &str) -> IdKey {
    (scheme.to_string(), value.to_string())
}

fn resolver(registry: &MockRegistry, timeout: Duration) -> HttpResolver {
    HttpResolver::new(registry.config().resolvers, timeout).unwrap()
}

fn limits() -> LookupLimits {
    LookupLimits {
        max_in_flight: 4,
        per_host_per_second: 0.0,
        timeout_secs: 5,
    }
}

#[test]
fn one_request_per_distinct_id_then_cache_hits() {
    let registry = MockRegistry::start(BTreeSet::from(["doi:10.1000/A".to_string()]), Duration::ZERO);
    let http = resolver(&registry, Duration::from_secs(5));
    let cache = LookupCache::in_memory();
    let ids = BTreeSet::from([key("doi", "10.1000/A"), key("doi", "10.1000/B"), key("pmid", "7")]);

    let verdicts = resolve_batch(&ids, &cache, &http, &limits(), false);
    assert_eq!(registry.request_count(), 3);
    assert_eq!(verdicts[&key("doi", "10.1000/A")].status, VerdictStatus::Exists);
    assert_eq!(verdicts[&key("doi", "10.1000/B")].status, VerdictStatus::NotFound);
    assert_eq!(verdicts[&key("pmid", "7")].status, VerdictStatus::NotFound);
    assert!(verdicts.values().all(|v| v.source.starts_with("127.0.0.1:")));

    let again = resolve_batch(&ids, &cache, &http, &limits(), false);
    assert_eq!(registry.request_count(), 3);
    assert_eq!(again, verdicts);
}

#[test]
fn stalled_and_failing_lookups_stay_unknown_and_isolated() {
    let registry = MockRegistry::start(BTreeSet::from(["doi:10.1000/OK".to_string()]), Duration::from_secs(3));
    let http = resolver(&registry, Duration::from_millis(500));
    let cache = LookupCache::in_memory();
    let ids = BTreeSet::from([key("doi", "slow-1"), key("doi", "fail-1"), key("doi", "10.1000/OK")]);

    let start = Instant::now();
    let verdicts = resolve_batch(&ids, &cache, &http, &limits(), false);
    assert!(start.elapsed() < Duration::from_secs(3));
    assert_eq!(verdicts[&key("doi", "slow-1")].status, VerdictStatus::Unknown);
    assert_eq!(verdicts[&key("doi", "fail-1")].status, VerdictStatus::Unknown);
    assert_eq!(verdicts[&key("doi", "10.1000/OK")].status, VerdictStatus::Exists);
    // only the definitive verdict is kept
    assert_eq!(cache.len(), 1);
}

#[test]
fn offline_makes_no_requests() {
    let registry = MockRegistry::start(BTreeSet::new(), Duration::ZERO);
    let http = resolver(&registry, Duration::from_secs(5));
    let verdicts = resolve_batch(&BTreeSet::from([key("doi", "10.1000/X")]), &LookupCache::in_memory(), &http, &limits(), true);
    assert_eq!(registry.request_count(), 0);
    assert_eq!(verdicts[&key("doi", "10.1000/X")].status, VerdictStatus::Unknown);
}

#[test]
fn case_variants_of_one_doi_are_looked_up_once() {
    let registry = MockRegistry::start(BTreeSet::new(), Duration::ZERO);
    let csv = "citing_id,citing_publication_date,cited_id,cited_publication_date\n\
               doi:10.1000/abc,2020,doi:10.1000/ABC,2019\n\
               doi:10.1000/Abc,2020,doi:10.1000/other,2019\n";
    let options = ValidateOptions::from_config(registry.config()).unwrap();
    let run = validate_table(parse_table(csv.as_bytes()).unwrap(), "c.csv", &options);
    assert_eq!(registry.request_count(), 2);
    assert_eq!(run.report.count(ErrorLabel::BrIdExistence), 4);
    assert_eq!(run.report.count(ErrorLabel::SelfCitation), 1);
}

#[test]
fn persistent_cache_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.json");
    let registry = MockRegistry::start(BTreeSet::new(), Duration::ZERO);
    let http = resolver(&registry, Duration::from_secs(5));
    let ids = BTreeSet::from([key("doi", "10.1000/P")]);

    let cache = LookupCache::open(&path, 30);
    resolve_batch(&ids, &cache, &http, &limits(), false);
    cache.save().unwrap();
    assert_eq!(registry.request_count(), 1);

    let reopened = LookupCache::open(&path, 30);
    let v = resolve_batch(&ids, &reopened, &http, &limits(), false);
    assert_eq!(registry.request_count(), 1);
    assert_eq!(v[&key("doi", "10.1000/P")].status, VerdictStatus::NotFound);
}
