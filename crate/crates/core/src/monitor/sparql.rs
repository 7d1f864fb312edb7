use serde_json::Value;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparqlError {
    #[error("request failed: {0}")]
    Transport(String),
    #[error("endpoint answered HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unreadable SPARQL results: {0}")]
    Results(String),
    #[error("query did not return a boolean")]
    NotBoolean,
    #[error("query did not return a single non-negative integer")]
    NonIntegerResult,
}

/// Minimal SPARQL protocol client: POSTed form-encoded queries, JSON results.
pub struct SparqlClient {
    client: reqwest::blocking::Client,
}

impl SparqlClient {
    pub fn new(timeout: Duration) -> Result<Self, SparqlError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("biblioguard/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| SparqlError::Transport(e.to_string()))?;
        Ok(SparqlClient { client })
    }

    fn query(&self, endpoint: &str, query: &str) -> Result<Value, SparqlError> {
        let response = self
            .client
            .post(endpoint)
            .header(reqwest::header::ACCEPT, "application/sparql-results+json")
            .form(&[("query", query)])
            .send()
            .map_err(|e| SparqlError::Transport(e.to_string()))?;
        let status = response.status();
        let body = response.text().map_err(|e| SparqlError::Transport(e.to_string()))?;
        if !status.is_success() {
            let mut body = body;
            body.truncate(200);
            return Err(SparqlError::Status {
                status: status.as_u16(),
                body,
            });
        }
        serde_json::from_str(&body).map_err(|e| SparqlError::Results(e.to_string()))
    }

    pub fn ask(&self, endpoint: &str, query: &str) -> Result<bool, SparqlError> {
        parse_boolean(&self.query(endpoint, query)?)
    }

    pub fn count(&self, endpoint: &str, query: &str) -> Result<u64, SparqlError> {
        parse_count(&self.query(endpoint, query)?)
    }
}

pub fn parse_boolean(results: &Value) -> Result<bool, SparqlError> {
    results.get("boolean").and_then(Value::as_bool).ok_or(SparqlError::NotBoolean)
}

/// The integer bound in the first solution (first variable of the head).
pub fn parse_count(results: &Value) -> Result<u64, SparqlError> {
    let var = results
        .pointer("/head/vars/0")
        .and_then(Value::as_str)
        .ok_or(SparqlError::NonIntegerResult)?;
    let bindings = results
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or(SparqlError::NonIntegerResult)?;
    let [solution] = bindings.as_slice() else {
        return Err(SparqlError::NonIntegerResult);
    };
    solution
        .get(var)
        .and_then(|b| b.get("value"))
        .and_then(Value::as_str)
        .and_then(|v| v.trim().parse::<u64>().ok())
        .ok_or(SparqlError::NonIntegerResult)
}
