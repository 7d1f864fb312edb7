use super::{MonitorReport, TestResult};
use crate::report::escape;
use std::fmt::Write as _;
use std::io::{self, Write};

const STYLE: &str = "body { font-family: system-ui, sans-serif; margin: 2em; color: #222; max-width: 70em; }
dl.run-info { display: grid; grid-template-columns: max-content auto; gap: 0.2em 1em; }
dl.run-info dt { font-weight: bold; }
section.test { border: 1px solid #ddd; border-radius: 4px; padding: 0.5em 1em; margin: 1em 0; }
section.test h2 { font-size: 1.1em; }
span.badge { font-size: 0.8em; padding: 2px 6px; border-radius: 3px; color: #fff; margin-left: 0.5em; }
span.badge.passed { background: #1a7f37; }
span.badge.failed { background: #cf222e; }
span.badge.indeterminate { background: #6e7781; }
pre.query { background: #f6f8fa; padding: 0.5em; overflow-x: auto; }
p.error { color: #cf222e; }
";

fn status(r: &TestResult) -> (&'static str, &'static str) {
    match r.passed {
        Some(true) => ("passed", "Passed"),
        Some(false) => ("failed", "Failed"),
        None => ("indeterminate", "Not determined"),
    }
}

/// Self-contained status page with one entry per executed test.
pub fn emit_monitor_html<W: Write>(report: &MonitorReport, mut out: W) -> io::Result<()> {
    let mut html = String::new();
    let collection = match report.collection {
        super::Collection::Meta => "Meta",
        super::Collection::Index => "Index",
    };
    let _ = writeln!(html, "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">");
    let _ = writeln!(html, "<title>Quality monitor: {collection}</title>");
    let _ = writeln!(html, "<style>\n{STYLE}</style>\n</head>\n<body>");
    let _ = writeln!(html, "<h1>Quality monitor: {collection}</h1>");
    let _ = writeln!(html, "<dl class=\"run-info\">");
    for (k, v) in [
        ("Endpoint", escape(&report.endpoint_url)),
        ("Executed at", report.executed_at.to_rfc3339()),
        ("Total running time", format!("{:.3} s", report.total_running_time)),
        ("Configuration", escape(&report.config_path)),
        (
            "Outcome",
            format!(
                "{} passed, {} failed, {} not determined",
                report.results.iter().filter(|r| r.passed == Some(true)).count(),
                report.failed(),
                report.indeterminate()
            ),
        ),
    ] {
        let _ = writeln!(html, "<dt>{k}</dt><dd>{v}</dd>");
    }
    let _ = writeln!(html, "</dl>");
    for r in &report.results {
        let (class, text) = status(r);
        let _ = writeln!(html, "<section class=\"test {class}\" id=\"test-{}\">", escape(&r.label));
        let _ = writeln!(html, "<h2>{}<span class=\"badge {class}\">{text}</span></h2>", escape(&r.label));
        let _ = writeln!(html, "<p>{}</p>", escape(&r.description));
        let _ = writeln!(html, "<dl class=\"run-info\">");
        let _ = writeln!(html, "<dt>Running time</dt><dd>{:.3} s</dd>", r.run.running_time);
        if let Some(n) = r.count {
            let _ = writeln!(html, "<dt>Count</dt><dd>{n}</dd>");
        }
        if let Some(ratio) = &r.ratio {
            let _ = writeln!(html, "<dt>Share</dt><dd>{}</dd>", escape(ratio));
        }
        if let Some(endpoint) = &r.endpoint_url {
            let _ = writeln!(html, "<dt>Endpoint</dt><dd>{}</dd>", escape(endpoint));
        }
        let _ = writeln!(html, "</dl>");
        if let Some(e) = &r.run.error {
            let _ = writeln!(html, "<p class=\"error\">{}</p>", escape(e));
        }
        let _ = writeln!(html, "<pre class=\"query\">{}</pre>\n</section>", escape(&r.query));
    }
    let _ = writeln!(html, "</body>\n</html>");
    out.write_all(html.as_bytes())
}
