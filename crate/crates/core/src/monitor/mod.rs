//! Post-publication quality monitoring: SPARQL tests run against a
//! collection's endpoint, with a JSON record and an HTML status page.

mod html;
mod sparql;

pub use html::emit_monitor_html;
pub use sparql::{parse_boolean, parse_count, SparqlClient, SparqlError};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::path::Path;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Overrides the configured endpoint of every test that has no endpoint of its own.
pub const SPARQL_ENDPOINT_ENV: &str = "BIBLIOGUARD_SPARQL_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Collection {
    Meta,
    Index,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMode {
    #[default]
    Ask,
    Count,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSpec {
    pub label: String,
    pub description: String,
    pub enabled: bool,
    pub query: String,
    pub mode: TestMode,
    /// Endpoint for this test only.
    pub endpoint_url: Option<String>,
    /// Population size the count is compared against.
    pub baseline_total: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig {
    pub endpoint_url: String,
    pub collection: Collection,
    pub timeout_secs: u64,
    pub tests: Vec<TestSpec>,
}

#[derive(Debug, Error)]
pub enum MonitorConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    endpoint_url: Option<String>,
    collection: Option<Collection>,
    #[serde(default)]
    timeout_secs: Option<u64>,
    #[serde(default)]
    tests: Vec<RawTest>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTest {
    label: Option<String>,
    description: Option<String>,
    enabled: Option<bool>,
    query: Option<String>,
    mode: Option<TestMode>,
    endpoint_url: Option<String>,
    baseline_total: Option<u64>,
}

pub const DEFAULT_TIMEOUT_SECS: u64 = 600;

impl MonitorConfig {
    pub fn load(path: &Path) -> Result<Self, MonitorConfigError> {
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|source| MonitorConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        Self::from_json(&bytes).map_err(|e| match e {
            MonitorConfigError::Parse { source, .. } => MonitorConfigError::Parse { path: shown.clone(), source },
            MonitorConfigError::Invalid { message, .. } => MonitorConfigError::Invalid { path: shown.clone(), message },
            other => other,
        })
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, MonitorConfigError> {
        let raw: RawConfig = serde_json::from_slice(bytes).map_err(|source| MonitorConfigError::Parse {
            path: String::new(),
            source,
        })?;
        let invalid = |message: String| MonitorConfigError::Invalid {
            path: String::new(),
            message,
        };
        let endpoint_url = raw
            .endpoint_url
            .filter(|u| !u.trim().is_empty())
            .ok_or_else(|| invalid("missing or empty 'endpoint_url'".into()))?;
        let collection = raw.collection.ok_or_else(|| invalid("missing 'collection'".into()))?;
        let mut tests: Vec<TestSpec> = Vec::with_capacity(raw.tests.len());
        for (n, t) in raw.tests.into_iter().enumerate() {
            let name = t.label.clone().unwrap_or_else(|| format!("#{}", n + 1));
            let required = |v: Option<String>, field: &str| {
                v.filter(|s| !s.trim().is_empty())
                    .ok_or_else(|| invalid(format!("test {name}: missing or empty '{field}'")))
            };
            let label = required(t.label, "label")?;
            if tests.iter().any(|x| x.label == label) {
                return Err(invalid(format!("test {name}: duplicate label")));
            }
            tests.push(TestSpec {
                description: required(t.description, "description")?,
                query: required(t.query, "query")?,
                label,
                enabled: t.enabled.unwrap_or(true),
                mode: t.mode.unwrap_or_default(),
                endpoint_url: t.endpoint_url,
                baseline_total: t.baseline_total,
            });
        }
        Ok(MonitorConfig {
            endpoint_url,
            collection,
            timeout_secs: raw.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS),
            tests,
        })
    }

    pub fn apply_env(&mut self) {
        self.apply_env_from(std::env::vars());
    }

    pub fn apply_env_from(&mut self, vars: impl IntoIterator<Item = (String, String)>) {
        for (key, value) in vars {
            if key == SPARQL_ENDPOINT_ENV && !value.is_empty() {
                self.endpoint_url = value;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub got_result: Option<bool>,
    /// Seconds.
    pub running_time: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub label: String,
    pub description: String,
    pub query: String,
    pub run: RunInfo,
    /// `None` when the query could not be executed.
    pub passed: Option<bool>,
    pub mode: TestMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub endpoint_url: String,
    pub collection: Collection,
    pub executed_at: DateTime<Utc>,
    /// Seconds.
    pub total_running_time: f64,
    pub config_path: String,
    pub results: Vec<TestResult>,
}

impl MonitorReport {
    pub fn failed(&self) -> usize {
        self.results.iter().filter(|r| r.passed == Some(false)).count()
    }

    pub fn indeterminate(&self) -> usize {
        self.results.iter().filter(|r| r.passed.is_none()).count()
    }
}

/// `count / total` as a percentage with one decimal, halves rounded up.
pub fn format_ratio(count: u64, total: u64) -> Option<String> {
    if total == 0 {
        return None;
    }
    let (count, total) = (count as u128, total as u128);
    let tenths = (count * 2000 + total) / (2 * total);
    Some(format!("{}.{}%", tenths / 10, tenths % 10))
}

fn run_one(client: &SparqlClient, default_endpoint: &str, test: &TestSpec) -> TestResult {
    let endpoint = test.endpoint_url.as_deref().unwrap_or(default_endpoint);
    let start = Instant::now();
    let outcome = match test.mode {
        TestMode::Ask => client.ask(endpoint, &test.query).map(|hit| (hit, None)),
        TestMode::Count => client.count(endpoint, &test.query).map(|n| (n > 0, Some(n))),
    };
    let running_time = start.elapsed().as_secs_f64();
    let (run, passed, count) = match outcome {
        Ok((hit, count)) => (
            RunInfo {
                got_result: Some(hit),
                running_time,
                error: None,
            },
            Some(!hit),
            count,
        ),
        Err(e) => (
            RunInfo {
                got_result: None,
                running_time,
                error: Some(e.to_string()),
            },
            None,
            None,
        ),
    };
    TestResult {
        label: test.label.clone(),
        description: test.description.clone(),
        query: test.query.clone(),
        run,
        passed,
        mode: test.mode,
        ratio: count.zip(test.baseline_total).and_then(|(c, t)| format_ratio(c, t)),
        count,
        endpoint_url: test.endpoint_url.clone(),
    }
}

/// Run the enabled tests accepted by `select`, one after the other, in
/// configuration order. Query failures are recorded in the results.
pub fn run_selected(
    config: &MonitorConfig,
    config_path: &str,
    select: impl Fn(&TestSpec) -> bool,
) -> Result<MonitorReport, SparqlError> {
    let client = SparqlClient::new(Duration::from_secs(config.timeout_secs))?;
    let executed_at = Utc::now();
    let start = Instant::now();
    let results = config
        .tests
        .iter()
        .filter(|t| t.enabled && select(t))
        .map(|t| run_one(&client, &config.endpoint_url, t))
        .collect();
    Ok(MonitorReport {
        endpoint_url: config.endpoint_url.clone(),
        collection: config.collection,
        executed_at,
        total_running_time: start.elapsed().as_secs_f64(),
        config_path: config_path.to_string(),
        results,
    })
}

/// Enabled ASK tests.
pub fn run_tests(config: &MonitorConfig, config_path: &str) -> Result<MonitorReport, SparqlError> {
    run_selected(config, config_path, |t| t.mode == TestMode::Ask)
}

/// Enabled count tests.
pub fn run_count_tests(config: &MonitorConfig, config_path: &str) -> Result<MonitorReport, SparqlError> {
    run_selected(config, config_path, |t| t.mode == TestMode::Count)
}

/// Every enabled test.
pub fn run_all(config: &MonitorConfig, config_path: &str) -> Result<MonitorReport, SparqlError> {
    run_selected(config, config_path, |_| true)
}

pub fn emit_monitor_json<W: Write>(report: &MonitorReport, mut out: W) -> io::Result<()> {
    let formatter = serde_json::ser::PrettyFormatter::with_indent(b"    ");
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    report.serialize(&mut ser).map_err(io::Error::from)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "endpoint_url": "http://localhost:1/sparql",
        "collection": "meta",
        "tests": [
            {"label": "a", "description": "first", "query": "ASK {}"},
            {"label": "b", "description": "second", "query": "ASK {}", "enabled": false},
            {"label": "c", "description": "third", "query": "SELECT (0 AS ?n) {}", "mode": "count", "baseline_total": 10}
        ]
    }"#;

    #[test]
    fn defaults() {
        let c = MonitorConfig::from_json(MINIMAL.as_bytes()).unwrap();
        assert_eq!(c.tests.len(), 3);
        assert_eq!(c.timeout_secs, 600);
        assert!(c.tests[0].enabled);
        assert_eq!(c.tests[0].mode, TestMode::Ask);
        assert!(!c.tests[1].enabled);
        assert_eq!(c.tests[2].mode, TestMode::Count);
    }

    #[test]
    fn config_errors_name_the_test() {
        let missing = r#"{"endpoint_url": "http://x", "collection": "index", "tests": [{"label": "dup_x", "description": "d"}]}"#;
        let err = MonitorConfig::from_json(missing.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("dup_x") && err.contains("query"), "{err}");
        let dup = r#"{"endpoint_url": "http://x", "collection": "index", "tests": [
            {"label": "a", "description": "d", "query": "q"}, {"label": "a", "description": "d", "query": "q"}]}"#;
        assert!(MonitorConfig::from_json(dup.as_bytes()).unwrap_err().to_string().contains("duplicate"));
        let no_endpoint = r#"{"endpoint_url": " ", "collection": "meta", "tests": []}"#;
        assert!(MonitorConfig::from_json(no_endpoint.as_bytes()).is_err());
        let bad_mode = r#"{"endpoint_url": "http://x", "collection": "meta", "tests": [{"label": "a", "description": "d", "query": "q", "mode": "select"}]}"#;
        assert!(matches!(MonitorConfig::from_json(bad_mode.as_bytes()), Err(MonitorConfigError::Parse { .. })));
    }

    #[test]
    fn env_override() {
        let mut c = MonitorConfig::from_json(MINIMAL.as_bytes()).unwrap();
        c.apply_env_from([(SPARQL_ENDPOINT_ENV.to_string(), "http://127.0.0.1:9/q".to_string())]);
        assert_eq!(c.endpoint_url, "http://127.0.0.1:9/q");
    }

    /// Round half up on exact rationals: compare 2·(1000·count) with
    /// (2·tenths ± 1)·total instead of using floating point.
    fn oracle_tenths(count: u64, total: u64) -> u128 {
        let scaled = count as u128 * 1000;
        let t = total as u128;
        let mut tenths = scaled / t;
        if 2 * (scaled - tenths * t) >= t {
            tenths += 1;
        }
        tenths
    }

    #[test]
    fn ratios() {
        assert_eq!(format_ratio(1_388_761, 121_302_680).as_deref(), Some("1.1%"));
        assert_eq!(format_ratio(2_544_914, 333_356_609).as_deref(), Some("0.8%"));
        assert_eq!(format_ratio(1, 2000).as_deref(), Some("0.1%"));
        assert_eq!(format_ratio(1, 2001).as_deref(), Some("0.0%"));
        assert_eq!(format_ratio(5, 5).as_deref(), Some("100.0%"));
        assert_eq!(format_ratio(0, 7).as_deref(), Some("0.0%"));
        assert_eq!(format_ratio(3, 0), None);
        for (c, t) in [(1u64, 3u64), (2, 3), (7, 11), (123_456, 789_012), (u64::MAX / 3, u64::MAX)] {
            let tenths = oracle_tenths(c, t);
            assert_eq!(format_ratio(c, t).unwrap(), format!("{}.{}%", tenths / 10, tenths % 10));
        }
    }

    #[test]
    fn unreachable_endpoint_is_indeterminate() {
        let mut c = MonitorConfig::from_json(MINIMAL.as_bytes()).unwrap();
        c.timeout_secs = 2;
        let report = run_all(&c, "cfg.json").unwrap();
        let labels: Vec<_> = report.results.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["a", "c"]);
        for r in &report.results {
            assert_eq!(r.passed, None);
            assert_eq!(r.run.got_result, None);
            assert!(r.run.error.is_some());
            assert_eq!(r.count, None);
        }
        assert_eq!(report.indeterminate(), 2);
        assert_eq!(report.failed(), 0);
        assert_eq!(run_tests(&c, "cfg.json").unwrap().results.len(), 1);
        assert_eq!(run_count_tests(&c, "cfg.json").unwrap().results[0].label, "c");
    }

    #[test]
    fn json_round_trip() {
        let report = MonitorReport {
            endpoint_url: "http://e".into(),
            collection: Collection::Index,
            executed_at: Utc::now(),
            total_running_time: 2.4839844703674316,
            config_path: "c.json".into(),
            results: vec![TestResult {
                label: "duplicate_br".into(),
                description: "d".into(),
                query: "ASK {}".into(),
                run: RunInfo {
                    got_result: Some(true),
                    running_time: 0.1 + 0.2,
                    error: None,
                },
                passed: Some(false),
                mode: TestMode::Ask,
                count: None,
                ratio: None,
                endpoint_url: None,
            }],
        };
        let mut buf = Vec::new();
        emit_monitor_json(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let keys: Vec<usize> = ["\"label\"", "\"description\"", "\"query\"", "\"run\"", "\"passed\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"error\": null"));
        let back: MonitorReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, report);
    }
}
