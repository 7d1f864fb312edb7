//! Level 3: existence of identifiers in their registries.
//!
//! Lookups go through a [`Resolver`]; verdicts are memoised in a
//! [`LookupCache`] that can be persisted between runs. Only definitive
//! answers (exists / not found) are cached; transport failures and offline
//! runs produce `Unknown`, which never yields a finding.

use crate::config::LookupLimits;
use chrono::{DateTime, Duration as ChronoDuration, Utc};
use percent_encoding::{utf8_percent_encode, AsciiSet, CONTROLS};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

pub type IdKey = (String, String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Exists,
    NotFound,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryVerdict {
    pub status: VerdictStatus,
    pub checked_at: DateTime<Utc>,
    /// Registry host, or a short tag (`offline`, `none`) when no lookup ran.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl RegistryVerdict {
    pub fn unknown(source: &str, reason: impl Into<String>) -> Self {
        RegistryVerdict {
            status: VerdictStatus::Unknown,
            checked_at: Utc::now(),
            source: source.to_string(),
            reason: Some(reason.into()),
        }
    }

    pub fn definitive(status: VerdictStatus, source: &str) -> Self {
        RegistryVerdict {
            status,
            checked_at: Utc::now(),
            source: source.to_string(),
            reason: None,
        }
    }

    pub fn is_definitive(&self) -> bool {
        self.status != VerdictStatus::Unknown
    }
}

/// Registry access for existence checks. Implementations must be safe for
/// concurrent use.
pub trait Resolver: Send + Sync {
    /// Identity of the registry answering for `scheme` (used for rate
    /// limiting and recorded in verdicts); `None` if the scheme has none.
    fn source(&self, scheme: &str) -> Option<String>;

    /// Ask the registry. `Ok(true)` = registered, `Ok(false)` = not found,
    /// `Err` = no definitive answer.
    fn lookup(&self, scheme: &str, value: &str) -> Result<bool, String>;
}

// Characters that would change the meaning of the request line. '/' is kept:
// DOI resolvers expect the raw suffix path.
const VALUE_ENCODE: &AsciiSet = &CONTROLS.add(b' ').add(b'"').add(b'#').add(b'%').add(b'<').add(b'>').add(b'?').add(b'`').add(b'{').add(b'}');

/// Resolver probing HTTP endpoints built from URL templates.
///
/// 2xx means the identifier exists, 404 and 410 mean it does not; any other
/// status or a transport failure is inconclusive.
pub struct HttpResolver {
    client: reqwest::blocking::Client,
    templates: BTreeMap<String, String>,
}

impl HttpResolver {
    pub fn new(templates: BTreeMap<String, String>, timeout: Duration) -> Result<Self, reqwest::Error> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("biblioguard/", env!("CARGO_PKG_VERSION")))
            .build()?;
        Ok(HttpResolver { client, templates })
    }

    pub fn url_for(&self, scheme: &str, value: &str) -> Option<String> {
        self.templates
            .get(scheme)
            .map(|t| t.replace("{value}", &utf8_percent_encode(value, VALUE_ENCODE).to_string()))
    }
}

impl Resolver for HttpResolver {
    fn source(&self, scheme: &str) -> Option<String> {
        let template = self.templates.get(scheme)?;
        let parsed = url::Url::parse(&template.replace("{value}", "x")).ok()?;
        Some(match parsed.port() {
            Some(port) => format!("{}:{port}", parsed.host_str()?),
            None => parsed.host_str()?.to_string(),
        })
    }

    fn lookup(&self, scheme: &str, value: &str) -> Result<bool, String> {
        let url = self
            .url_for(scheme, value)
            .ok_or_else(|| format!("no resolver for scheme '{scheme}'"))?;
        let response = self.client.get(&url).send().map_err(|e| e.to_string())?;
        let status = response.status();
        if status.is_success() {
            Ok(true)
        } else if status == reqwest::StatusCode::NOT_FOUND || status == reqwest::StatusCode::GONE {
            Ok(false)
        } else {
            Err(format!("HTTP {status}"))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    scheme: String,
    value: String,
    #[serde(flatten)]
    verdict: RegistryVerdict,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    entries: Vec<CacheEntry>,
}

const CACHE_VERSION: u32 = 1;

/// Memoised registry verdicts keyed by (scheme, value).
pub struct LookupCache {
    entries: Mutex<HashMap<IdKey, RegistryVerdict>>,
    path: Option<PathBuf>,
    ttl: ChronoDuration,
}

impl LookupCache {
    pub fn in_memory() -> Self {
        LookupCache {
            entries: Mutex::new(HashMap::new()),
            path: None,
            ttl: ChronoDuration::days(30),
        }
    }

    /// Open a persistent cache; a missing file starts empty. An unreadable
    /// or corrupt file is discarded with a warning.
    pub fn open(path: &Path, ttl_days: u64) -> Self {
        let mut entries = HashMap::new();
        match std::fs::read(path) {
            Ok(bytes) => match serde_json::from_slice::<CacheFile>(&bytes) {
                Ok(file) if file.version == CACHE_VERSION => {
                    for e in file.entries {
                        entries.insert((e.scheme, e.value), e.verdict);
                    }
                }
                Ok(file) => log::warn!("ignoring cache {} with version {}", path.display(), file.version),
                Err(e) => log::warn!("ignoring corrupt cache {}: {e}", path.display()),
            },
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => log::warn!("cannot read cache {}: {e}", path.display()),
        }
        LookupCache {
            entries: Mutex::new(entries),
            path: Some(path.to_path_buf()),
            ttl: ChronoDuration::days(ttl_days.min(i64::MAX as u64 / 86_400) as i64),
        }
    }

    /// A fresh definitive verdict, if cached.
    pub fn get(&self, scheme: &str, value: &str) -> Option<RegistryVerdict> {
        let entries = self.entries.lock().expect("cache lock");
        entries
            .get(&(scheme.to_string(), value.to_string()))
            .filter(|v| v.is_definitive() && Utc::now() - v.checked_at <= self.ttl)
            .cloned()
    }

    pub fn insert(&self, scheme: &str, value: &str, verdict: RegistryVerdict) {
        if verdict.is_definitive() {
            self.entries
                .lock()
                .expect("cache lock")
                .insert((scheme.to_string(), value.to_string()), verdict);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write the cache file (no-op for in-memory caches).
    pub fn save(&self) -> io::Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut entries: Vec<CacheEntry> = self
            .entries
            .lock()
            .expect("cache lock")
            .iter()
            .map(|((scheme, value), verdict)| CacheEntry {
                scheme: scheme.clone(),
                value: value.clone(),
                verdict: verdict.clone(),
            })
            .collect();
        entries.sort_by(|a, b| (&a.scheme, &a.value).cmp(&(&b.scheme, &b.value)));
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("json.tmp");
        let bytes = serde_json::to_vec_pretty(&CacheFile {
            version: CACHE_VERSION,
            entries,
        })?;
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)
    }
}

/// Per-host spacing of request start times.
pub struct RateLimiter {
    interval: Option<Duration>,
    next_slot: Mutex<HashMap<String, Instant>>,
}

impl RateLimiter {
    pub fn new(per_second: f64) -> Self {
        RateLimiter {
            interval: (per_second > 0.0).then(|| Duration::from_secs_f64(1.0 / per_second)),
            next_slot: Mutex::new(HashMap::new()),
        }
    }

    /// Block until a request to `host` may start.
    pub fn acquire(&self, host: &str) {
        let Some(interval) = self.interval else {
            return;
        };
        let wait = {
            let mut slots = self.next_slot.lock().expect("rate limiter lock");
            let now = Instant::now();
            let slot = slots.get(host).copied().filter(|s| *s > now).unwrap_or(now);
            slots.insert(host.to_string(), slot + interval);
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

/// Resolve a deduplicated set of identifiers.
///
/// Cached verdicts are reused; the remaining identifiers are looked up by at
/// most `limits.max_in_flight` workers, spaced per registry host. The result
/// does not depend on completion order.
pub fn resolve_batch(
    ids: &BTreeSet<IdKey>,
    cache: &LookupCache,
    resolver: &dyn Resolver,
    limits: &LookupLimits,
    offline: bool,
) -> BTreeMap<IdKey, RegistryVerdict> {
    let mut results = BTreeMap::new();
    let mut pending: Vec<(&IdKey, String)> = Vec::new();
    for key in ids {
        let (scheme, value) = key;
        if let Some(v) = cache.get(scheme, value) {
            results.insert(key.clone(), v);
        } else if offline {
            results.insert(key.clone(), RegistryVerdict::unknown("offline", "offline mode"));
        } else {
            match resolver.source(scheme) {
                Some(host) => pending.push((key, host)),
                None => {
                    results.insert(key.clone(), RegistryVerdict::unknown("none", format!("no registry for scheme '{scheme}'")));
                }
            }
        }
    }
    if pending.is_empty() {
        return results;
    }

    let limiter = RateLimiter::new(limits.per_host_per_second);
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(pending.len()));
    let workers = limits.max_in_flight.clamp(1, pending.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((key, host)) = pending.get(i) else { break };
                limiter.acquire(host);
                let verdict = match resolver.lookup(&key.0, &key.1) {
                    Ok(true) => RegistryVerdict::definitive(VerdictStatus::Exists, host),
                    Ok(false) => RegistryVerdict::definitive(VerdictStatus::NotFound, host),
                    Err(reason) => RegistryVerdict::unknown(host, reason),
                };
                cache.insert(&key.0, &key.1, verdict.clone());
                done.lock().expect("results lock").push(((*key).clone(), verdict));
            });
        }
    });
    results.extend(done.into_inner().expect("results lock"));
    results
}

/// Existence verdict for a single identifier.
pub fn check_id_existence(
    scheme: &str,
    value: &str,
    cache: &LookupCache,
    resolver: &dyn Resolver,
    limits: &LookupLimits,
    offline: bool,
) -> RegistryVerdict {
    let key = (scheme.to_string(), value.to_string());
    let ids = BTreeSet::from([key.clone()]);
    resolve_batch(&ids, cache, resolver, limits, offline)
        .remove(&key)
        .expect("every requested id gets a verdict")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicUsize;

    /// In-process resolver answering from a fixed table.
    struct TableResolver {
        known: BTreeMap<IdKey, Result<bool, String>>,
        calls: AtomicUsize,
        delay: Duration,
    }

    impl TableResolver {
        fn new(entries: &[(&str, &str, Result<bool, String>)]) -> Self {
            TableResolver {
                known: entries
                    .iter()
                    .map(|(s, v, r)| ((s.to_string(), v.to_string()), r.clone()))
                    .collect(),
                calls: AtomicUsize::new(0),
                delay: Duration::ZERO,
            }
        }
    }

    impl Resolver for TableResolver {
        fn source(&self, scheme: &str) -> Option<String> {
            (scheme != "viaf").then(|| format!("{scheme}.test"))
        }
        fn lookup(&self, scheme: &str, value: &str) -> Result<bool, String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            std::thread::sleep(self.delay);
            self.known
                .get(&(scheme.to_string(), value.to_string()))
                .cloned()
                .unwrap_or(Ok(false))
        }
    }

    fn key(s: &str, v: &str) -> IdKey {
        (s.to_string(), v.to_string())
    }

    fn unlimited() -> LookupLimits {
        LookupLimits {
            per_host_per_second: 0.0,
            ..LookupLimits::default()
        }
    }

    #[test]
    fn verdicts_from_resolver() {
        let r = TableResolver::new(&[
            ("doi", "10.1/found", Ok(true)),
            ("doi", "10.1/timeout", Err("timed out".into())),
        ]);
        let cache = LookupCache::in_memory();
        let l = unlimited();
        assert_eq!(check_id_existence("doi", "10.1/found", &cache, &r, &l, false).status, VerdictStatus::Exists);
        assert_eq!(check_id_existence("doi", "10.1/missing", &cache, &r, &l, false).status, VerdictStatus::NotFound);
        let v = check_id_existence("doi", "10.1/timeout", &cache, &r, &l, false);
        assert_eq!(v.status, VerdictStatus::Unknown);
        assert_eq!(v.reason.as_deref(), Some("timed out"));
        // no registry for the scheme
        assert_eq!(check_id_existence("viaf", "1", &cache, &r, &l, false).status, VerdictStatus::Unknown);
        assert_eq!(r.calls.load(Ordering::SeqCst), 3);
        // only definitive answers are cached
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn offline_never_calls_out() {
        let r = TableResolver::new(&[]);
        let cache = LookupCache::in_memory();
        let v = check_id_existence("doi", "10.1/x", &cache, &r, &unlimited(), true);
        assert_eq!(v.status, VerdictStatus::Unknown);
        assert_eq!(r.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn one_lookup_per_distinct_id() {
        let r = TableResolver::new(&[("doi", "10.1/a", Ok(true))]);
        let cache = LookupCache::in_memory();
        let ids: BTreeSet<IdKey> = ["10.1/a", "10.1/b", "10.1/c", "10.1/a", "10.1/a"]
            .iter()
            .map(|v| key("doi", v))
            .collect();
        let out = resolve_batch(&ids, &cache, &r, &unlimited(), false);
        assert_eq!(out.len(), 3);
        assert_eq!(r.calls.load(Ordering::SeqCst), 3);
        // warm cache: no further calls
        resolve_batch(&ids, &cache, &r, &unlimited(), false);
        assert_eq!(r.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn failures_are_isolated() {
        let r = TableResolver::new(&[
            ("doi", "10.1/a", Ok(true)),
            ("doi", "10.1/b", Err("timeout".into())),
            ("pmid", "5", Ok(true)),
        ]);
        let ids: BTreeSet<IdKey> = [key("doi", "10.1/a"), key("doi", "10.1/b"), key("pmid", "5")].into();
        let out = resolve_batch(&ids, &LookupCache::in_memory(), &r, &unlimited(), false);
        let statuses: Vec<_> = out.values().map(|v| v.status).collect();
        assert_eq!(statuses, vec![VerdictStatus::Exists, VerdictStatus::Unknown, VerdictStatus::Exists]);
    }

    #[test]
    fn persistent_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("cache.json");
        let r = TableResolver::new(&[("doi", "10.1/a", Ok(true))]);
        let ids: BTreeSet<IdKey> = [key("doi", "10.1/a"), key("doi", "10.1/b")].into();
        {
            let cache = LookupCache::open(&path, 30);
            resolve_batch(&ids, &cache, &r, &unlimited(), false);
            cache.save().unwrap();
        }
        let cache = LookupCache::open(&path, 30);
        assert_eq!(cache.len(), 2);
        let r2 = TableResolver::new(&[]);
        let out = resolve_batch(&ids, &cache, &r2, &unlimited(), false);
        assert_eq!(r2.calls.load(Ordering::SeqCst), 0);
        assert_eq!(out[&key("doi", "10.1/b")].status, VerdictStatus::NotFound);
        // expired entries are looked up again
        let stale = LookupCache::open(&path, 0);
        std::thread::sleep(Duration::from_millis(5));
        resolve_batch(&ids, &stale, &r2, &unlimited(), false);
        assert_eq!(r2.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn corrupt_cache_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        std::fs::write(&path, "not json").unwrap();
        assert!(LookupCache::open(&path, 30).is_empty());
    }

    #[test]
    fn parallelism_is_bounded_and_order_free() {
        let mut r = TableResolver::new(&[]);
        r.delay = Duration::from_millis(20);
        let ids: BTreeSet<IdKey> = (0..16).map(|i| key("doi", &format!("10.1/{i}"))).collect();
        let limits = LookupLimits {
            max_in_flight: 8,
            per_host_per_second: 0.0,
            timeout_secs: 1,
        };
        let start = Instant::now();
        let out = resolve_batch(&ids, &LookupCache::in_memory(), &r, &limits, false);
        let elapsed = start.elapsed();
        assert_eq!(out.keys().cloned().collect::<BTreeSet<_>>(), ids);
        // 16 lookups of 20 ms with 8 workers: two waves
        assert!(elapsed >= Duration::from_millis(40), "{elapsed:?}");
    }

    #[test]
    fn rate_limiter_spaces_requests() {
        let limiter = RateLimiter::new(50.0);
        let start = Instant::now();
        for _ in 0..5 {
            limiter.acquire("h");
        }
        // first request is immediate, the other four 20 ms apart
        assert!(start.elapsed() >= Duration::from_millis(75));
        let other = Instant::now();
        limiter.acquire("other-host");
        assert!(other.elapsed() < Duration::from_millis(15));
    }

    #[test]
    fn http_resolver_urls() {
        let r = HttpResolver::new(
            BTreeMap::from([("doi".to_string(), "http://127.0.0.1:9/h/{value}".to_string())]),
            Duration::from_secs(1),
        )
        .unwrap();
        assert_eq!(r.url_for("doi", "10.1/a b#c").unwrap(), "http://127.0.0.1:9/h/10.1/a%20b%23c");
        assert_eq!(r.source("doi").as_deref(), Some("127.0.0.1:9"));
        assert_eq!(r.source("orcid"), None);
    }
}
