//! Local HTTP stand-ins for a SPARQL endpoint and identifier registries.
#![allow(dead_code)]

use biblioguard_core::config::RuleConfig;
use oxigraph::model::{GraphNameRef, Literal, NamedNode, QuadRef};
use oxigraph::sparql::results::QueryResultsFormat;
use oxigraph::store::Store;
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

/// One parsed HTTP request.
pub struct Request {
    pub method: String,
    pub path: String,
    pub body: String,
}

pub struct Reply {
    pub status: u16,
    pub content_type: &'static str,
    pub body: Vec<u8>,
}

impl Reply {
    fn new(status: u16, body: impl Into<Vec<u8>>) -> Self {
        Reply {
            status,
            content_type: "text/plain",
            body: body.into(),
        }
    }
}

/// Minimal HTTP/1.1 server: one thread per connection, one request per
/// connection.
struct Running {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

fn read_request(stream: &mut TcpStream) -> Option<Request> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let mut parts = line.split_whitespace();
    let (method, path) = (parts.next()?.to_string(), parts.next()?.to_string());
    let mut length = 0;
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let header = line.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((name, value)) = header.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    Some(Request {
        method,
        path,
        body: String::from_utf8_lossy(&body).into_owned(),
    })
}

fn serve(mut stream: TcpStream, handler: &(dyn Fn(Request) -> Reply + Send + Sync)) {
    let Some(request) = read_request(&mut stream) else { return };
    let reply = handler(request);
    let head = format!(
        "HTTP/1.1 {} X\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        reply.status,
        reply.content_type,
        reply.body.len()
    );
    let _ = stream.write_all(head.as_bytes());
    let _ = stream.write_all(&reply.body);
    let _ = stream.flush();
}

impl Running {
    fn start(handler: impl Fn(Request) -> Reply + Send + Sync + 'static) -> (Self, String) {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
        let addr = listener.local_addr().expect("bound address");
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let handler: Arc<dyn Fn(Request) -> Reply + Send + Sync> = Arc::new(handler);
        let thread = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let h = Arc::clone(&handler);
                std::thread::spawn(move || serve(stream, h.as_ref()));
            }
        });
        (
            Running {
                addr,
                stop,
                thread: Some(thread),
            },
            format!("http://{addr}"),
        )
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// SPARQL protocol endpoint over an in-memory store. `/sparql` answers
/// queries; `/broken` always fails with HTTP 500.
pub struct MockSparql {
    pub store: Store,
    pub base: String,
    pub requests: Arc<AtomicUsize>,
    _running: Running,
}

impl MockSparql {
    pub fn start() -> Self {
        let store = Store::new().expect("in-memory store");
        let requests = Arc::new(AtomicUsize::new(0));
        let (st, counter) = (store.clone(), Arc::clone(&requests));
        let (running, base) = Running::start(move |request| {
            counter.fetch_add(1, Ordering::SeqCst);
            if request.path == "/broken" {
                return Reply::new(500, "internal failure");
            }
            let query = url::form_urlencoded::parse(request.body.as_bytes())
                .find(|(k, _)| k == "query")
                .map(|(_, v)| v.into_owned());
            match query.map(|q| st.query(q.as_str())) {
                Some(Ok(results)) => match results.write(Vec::new(), QueryResultsFormat::Json) {
                    Ok(bytes) => Reply {
                        status: 200,
                        content_type: "application/sparql-results+json",
                        body: bytes,
                    },
                    Err(e) => Reply::new(500, e.to_string()),
                },
                Some(Err(e)) => Reply::new(400, e.to_string()),
                None => Reply::new(400, "missing query"),
            }
        });
        MockSparql {
            store,
            base,
            requests,
            _running: running,
        }
    }

    pub fn endpoint(&self) -> String {
        format!("{}/sparql", self.base)
    }

    pub fn broken_endpoint(&self) -> String {
        format!("{}/broken", self.base)
    }

    fn quad(&self, s: &str, p: &str, o: Object, insert: bool) {
        let (s, p) = (NamedNode::new(s).unwrap(), NamedNode::new(p).unwrap());
        let done = match o {
            Object::Iri(o) => {
                let o = NamedNode::new(o).unwrap();
                let q = QuadRef::new(&s, &p, &o, GraphNameRef::DefaultGraph);
                if insert { self.store.insert(q) } else { self.store.remove(q) }
            }
            Object::Literal(o) => {
                let o = Literal::new_simple_literal(o);
                let q = QuadRef::new(&s, &p, &o, GraphNameRef::DefaultGraph);
                if insert { self.store.insert(q) } else { self.store.remove(q) }
            }
        };
        done.expect("store write");
    }

    pub fn add(&self, s: &str, p: &str, o: Object) {
        self.quad(s, p, o, true)
    }

    pub fn delete(&self, s: &str, p: &str, o: Object) {
        self.quad(s, p, o, false)
    }
}

pub enum Object<'a> {
    Iri(&'a str),
    Literal(&'a str),
}

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const FABIO_EXPRESSION: &str = "http://purl.org/spar/fabio/Expression";
pub const HAS_IDENTIFIER: &str = "http://purl.org/spar/datacite/hasIdentifier";
pub const USES_SCHEME: &str = "http://purl.org/spar/datacite/usesIdentifierScheme";
pub const DOI_SCHEME: &str = "http://purl.org/spar/datacite/doi";
pub const LITERAL_VALUE: &str = "http://www.essepuntato.it/2010/06/literalreification/hasLiteralValue";

/// A bibliographic resource `br` with one DOI identifier entity `id`.
pub fn add_expression(sparql: &MockSparql, br: &str, id: &str, doi: &str) {
    sparql.add(br, RDF_TYPE, Object::Iri(FABIO_EXPRESSION));
    sparql.add(br, HAS_IDENTIFIER, Object::Iri(id));
    sparql.add(id, USES_SCHEME, Object::Iri(DOI_SCHEME));
    sparql.add(id, LITERAL_VALUE, Object::Literal(doi));
}

/// Registry answering `GET /{scheme}/{value}` with 200 for registered
/// identifiers and 404 otherwise; `/{scheme}/slow-*` stalls first and
/// `/{scheme}/fail-*` answers 503.
pub struct MockRegistry {
    pub base: String,
    pub requests: Arc<AtomicUsize>,
    pub seen: Arc<Mutex<Vec<String>>>,
    _running: Running,
}

impl MockRegistry {
    pub fn start(registered: BTreeSet<String>, stall: Duration) -> Self {
        let requests = Arc::new(AtomicUsize::new(0));
        let seen = Arc::new(Mutex::new(Vec::new()));
        let (counter, log) = (Arc::clone(&requests), Arc::clone(&seen));
        let (running, base) = Running::start(move |request| {
            counter.fetch_add(1, Ordering::SeqCst);
            let decoded = percent_decode(request.path.trim_start_matches('/'));
            log.lock().unwrap().push(decoded.clone());
            let (scheme, value) = decoded.split_once('/').unwrap_or((decoded.as_str(), ""));
            let status = if request.method != "GET" {
                405
            } else if value.starts_with("slow-") {
                std::thread::sleep(stall);
                200
            } else if value.starts_with("fail-") {
                503
            } else if registered.contains(&format!("{scheme}:{value}")) {
                200
            } else {
                404
            };
            Reply::new(status, "")
        });
        MockRegistry {
            base,
            requests,
            seen,
            _running: running,
        }
    }

    /// Rule configuration sending every scheme's lookups to this registry.
    pub fn config(&self) -> RuleConfig {
        let mut config = RuleConfig::default();
        let schemes: Vec<String> = config.br_schemes.iter().chain(config.ra_schemes.iter()).cloned().collect();
        config.resolvers = schemes
            .into_iter()
            .map(|s| (s.clone(), format!("{}/{s}/{{value}}", self.base)))
            .collect();
        config.limits.per_host_per_second = 0.0;
        config.limits.timeout_secs = 5;
        config
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

fn percent_decode(s: &str) -> String {
    percent_encoding::percent_decode_str(s).decode_utf8_lossy().into_owned()
}
