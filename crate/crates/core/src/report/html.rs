//! Self-contained HTML rendering of a validation report.
//!
//! The page carries the findings as a JSON data island
//! (`<script type="application/json" id="report-data">`), a table with the
//! source rows that have at least one finding, inline CSS, and the viewer
//! script. Inside the table every (finding, row, field) pair is one
//! `span.error-span[data-error-id]` wrapping the implicated items, and every
//! finding has exactly one `button.error-marker[data-error-id]` placed after
//! its first span. Finding ids are `e<index>` over the report order.

use super::{check_positions, UnresolvedPosition, ValidationError};
use crate::table::{field_delimiter, TableDocument};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{self, Write};
use thiserror::Error;

/// Placeholder viewer used when no compiled viewer bundle is supplied.
/// Markers still show their message through the `title` attribute.
pub const VIEWER_STUB: &[u8] = include_bytes!("../../assets/viewer-stub.js");

const STYLE: &str = include_str!("../../assets/report.css");

#[derive(Debug, Error)]
pub enum HtmlError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("viewer asset is not valid UTF-8")]
    AssetEncoding,
    #[error(transparent)]
    Position(#[from] UnresolvedPosition),
}

pub fn emit_html<W: Write>(
    errors: &[ValidationError],
    source: &TableDocument,
    viewer_asset: &[u8],
    mut out: W,
) -> Result<(), HtmlError> {
    let script = std::str::from_utf8(viewer_asset).map_err(|_| HtmlError::AssetEncoding)?;
    check_positions(errors, source)?;
    let page = render_page(errors, source, script);
    out.write_all(page.as_bytes())?;
    Ok(())
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn data_island(errors: &[ValidationError]) -> String {
    serde_json::to_string(errors)
        .expect("findings serialize")
        .replace('<', "\\u003c")
        .replace('>', "\\u003e")
        .replace('&', "\\u0026")
}

/// Span of one finding inside one cell.
#[derive(Debug, Clone)]
struct CellSpan {
    error: usize,
    start: usize,
    end: usize,
}

fn render_page(errors: &[ValidationError], source: &TableDocument, script: &str) -> String {
    let n_errors = errors.iter().filter(|e| e.is_error()).count();
    let n_warnings = errors.len() - n_errors;
    let kind = source.kind.as_str().to_uppercase();

    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(html, "<title>{kind} validation report</title>");
    let _ = writeln!(html, "<style>\n{STYLE}</style>\n</head>\n<body>");
    let _ = writeln!(html, "<h1>{kind} validation report</h1>");

    if errors.is_empty() {
        html.push_str("<p class=\"no-errors\">No errors detected.</p>\n");
    } else {
        let _ = writeln!(
            html,
            "<p class=\"summary\">{n_errors} error(s), {n_warnings} warning(s). Click a square to highlight every location of a finding; hover or focus it to read the explanation.</p>"
        );
        html.push_str(&render_table(errors, source));
    }

    let _ = writeln!(
        html,
        "<script type=\"application/json\" id=\"report-data\">{}</script>",
        data_island(errors)
    );
    let _ = writeln!(
        html,
        "<script>\n{}\n</script>\n</body>\n</html>",
        script.replace("</script", "<\\/script")
    );
    html
}

fn render_table(errors: &[ValidationError], source: &TableDocument) -> String {
    // (row, field) -> findings touching that cell
    let mut cells: BTreeMap<(usize, &str), Vec<(usize, &[usize])>> = BTreeMap::new();
    // first (row, field) of each finding, in table order
    let mut marker_cell: Vec<(usize, usize)> = Vec::with_capacity(errors.len());
    for (id, e) in errors.iter().enumerate() {
        let mut first: Option<(usize, usize)> = None;
        for (row, field, items) in e.position.table.pairs() {
            cells.entry((row, field)).or_default().push((id, items));
            let rank = source.field_position(field).unwrap_or(usize::MAX);
            if first.map_or(true, |f| (row, rank) < f) {
                first = Some((row, rank));
            }
        }
        marker_cell.push(first.unwrap_or((usize::MAX, usize::MAX)));
    }
    let rows: BTreeSet<usize> = cells.keys().map(|(r, _)| *r).collect();

    let mut html = String::from("<table class=\"report\">\n<thead><tr><th>row</th>");
    for h in &source.header {
        let _ = write!(html, "<th>{}</th>", escape(h));
    }
    html.push_str("</tr></thead>\n<tbody>\n");

    for row_index in rows {
        let row = &source.rows[row_index];
        let _ = write!(
            html,
            "<tr data-row=\"{row_index}\"><td class=\"row-index\">{row_index}</td>"
        );
        for (rank, cell) in row.cells.iter().enumerate() {
            let _ = write!(html, "<td data-field=\"{}\">", escape(&cell.field_name));
            let touching = cells
                .get(&(row_index, cell.field_name.as_str()))
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            let markers: BTreeSet<usize> = touching
                .iter()
                .map(|(id, _)| *id)
                .filter(|id| marker_cell[*id] == (row_index, rank))
                .collect();
            render_cell(&mut html, cell, touching, &markers, errors);
            html.push_str("</td>");
        }
        html.push_str("</tr>\n");
    }
    html.push_str("</tbody>\n</table>\n");
    html
}

/// Make the spans of a cell laminar: two spans that partially overlap are
/// both widened to their union until every pair is nested or disjoint.
fn make_laminar(spans: &mut [CellSpan]) {
    loop {
        let mut changed = false;
        for i in 0..spans.len() {
            for j in 0..spans.len() {
                let (a, b) = (&spans[i], &spans[j]);
                let overlap = a.start <= b.end && b.start <= a.end;
                let nested = (a.start <= b.start && b.end <= a.end) || (b.start <= a.start && a.end <= b.end);
                if overlap && !nested {
                    let (start, end) = (a.start.min(b.start), a.end.max(b.end));
                    spans[i].start = start;
                    spans[i].end = end;
                    spans[j].start = start;
                    spans[j].end = end;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

fn open_span(html: &mut String, id: usize, errors: &[ValidationError], extra_class: &str) {
    let e = &errors[id];
    let _ = write!(
        html,
        "<span class=\"error-span {}{extra_class}\" data-error-id=\"e{id}\" data-label=\"{}\">",
        e.error_type, e.error_label
    );
}

fn marker(html: &mut String, id: usize, errors: &[ValidationError]) {
    let e = &errors[id];
    let _ = write!(
        html,
        "<button type=\"button\" class=\"error-marker {}\" data-error-id=\"e{id}\" title=\"{}\" aria-label=\"{}: {}\"></button>",
        e.error_type,
        escape(&e.message),
        e.error_label,
        escape(&e.message)
    );
}

fn render_cell(
    html: &mut String,
    cell: &crate::table::Cell,
    touching: &[(usize, &[usize])],
    markers: &BTreeSet<usize>,
    errors: &[ValidationError],
) {
    let n = cell.items.len();
    if n == 0 {
        // findings on an empty cell get an explicit placeholder to highlight
        for (id, _) in touching {
            open_span(html, *id, errors, " empty");
            html.push_str("&#8709;</span>");
            if markers.contains(id) {
                marker(html, *id, errors);
            }
        }
        return;
    }

    let mut faulty = vec![false; n];
    let mut spans: Vec<CellSpan> = Vec::with_capacity(touching.len());
    for (id, items) in touching {
        let valid: Vec<usize> = items.iter().copied().filter(|i| *i < n).collect();
        let (start, end) = if valid.is_empty() {
            faulty.iter_mut().for_each(|f| *f = true);
            (0, n - 1)
        } else {
            valid.iter().for_each(|&i| faulty[i] = true);
            (valid[0], *valid.last().expect("non-empty"))
        };
        spans.push(CellSpan { error: *id, start, end });
    }
    make_laminar(&mut spans);
    spans.sort_by(|a, b| (a.start, std::cmp::Reverse(a.end), a.error).cmp(&(b.start, std::cmp::Reverse(b.end), b.error)));

    let delimiter = escape(field_delimiter(&cell.field_name));
    let mut stack: Vec<&CellSpan> = Vec::new();
    let mut next = 0;
    for (i, item) in cell.items.iter().enumerate() {
        while next < spans.len() && spans[next].start == i {
            open_span(html, spans[next].error, errors, "");
            stack.push(&spans[next]);
            next += 1;
        }
        let class = if faulty[i] { "item faulty" } else { "item" };
        let _ = write!(html, "<span class=\"{class}\" data-item=\"{i}\">{}</span>", escape(&item.raw));
        while stack.last().is_some_and(|s| s.end == i) {
            let s = stack.pop().expect("checked");
            html.push_str("</span>");
            if markers.contains(&s.error) {
                marker(html, s.error, errors);
            }
        }
        if i + 1 < n {
            html.push_str(&delimiter);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ErrorLabel, ValidationLevel};
    use crate::report::{LocatedIn, PositionTable};
    use crate::table::{parse_table, META_HEADER};

    fn doc(n_rows: usize) -> TableDocument {
        let mut csv = META_HEADER.join(",");
        csv.push('\n');
        for i in 0..n_rows {
            let _ = writeln!(
                csv,
                "doi:10.1000/{i} pmid:{},Title <{i}>,\"A, B [orcid:0000-0002-1825-0097]; C, D\",2020,,,,1-2,journal article,,",
                i + 1
            );
        }
        parse_table(csv.as_bytes()).unwrap()
    }

    fn render(errors: &[ValidationError], d: &TableDocument) -> String {
        let mut buf = Vec::new();
        emit_html(errors, d, VIEWER_STUB, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn duplicate(rows: &[usize]) -> ValidationError {
        let mut t = PositionTable::new();
        for r in rows {
            t.add(*r, "id", [0, 1]);
        }
        ValidationError::new(ErrorLabel::DuplicateBr, ValidationLevel::CsvWellformedness, LocatedIn::Row, t)
    }

    #[test]
    fn only_rows_with_findings_are_shown() {
        let d = doc(10);
        let html = render(&[duplicate(&[2, 3])], &d);
        assert_eq!(html.matches("<tr data-row=").count(), 2);
        assert!(html.contains("<tr data-row=\"2\">"));
        assert!(html.contains("<tr data-row=\"3\">"));
    }

    #[test]
    fn one_marker_per_finding_and_one_span_per_cell() {
        let d = doc(4);
        let html = render(&[duplicate(&[2, 3])], &d);
        assert_eq!(html.matches("class=\"error-marker").count(), 1);
        assert_eq!(html.matches("data-error-id=\"e0\"").count(), 3);
        assert_eq!(html.matches("class=\"error-span").count(), 2);
    }

    #[test]
    fn empty_report_page() {
        let d = doc(3);
        let html = render(&[], &d);
        assert!(html.contains("No errors detected."));
        assert!(!html.contains("<button"));
        assert!(!html.contains("<table"));
    }

    #[test]
    fn overlapping_findings_nest() {
        let d = doc(1);
        let mut t = PositionTable::new();
        t.add(0, "author", [0, 1]);
        let dup = ValidationError::new(ErrorLabel::DuplicateRa, ValidationLevel::CsvWellformedness, LocatedIn::Item, t);
        let fmt = ValidationError::at_item(ErrorLabel::PeopleItemFormat, ValidationLevel::CsvWellformedness, 0, "author", 1);
        let id_dup = ValidationError::at_item(ErrorLabel::BrIdFormat, ValidationLevel::CsvWellformedness, 0, "id", 1);
        let html = render(&[dup, fmt, id_dup], &d);
        assert_eq!(html.matches("class=\"error-marker").count(), 3);
        assert_eq!(html.matches("class=\"error-span").count(), 3);
        // balanced spans
        assert_eq!(html.matches("<span").count(), html.matches("</span>").count());
    }

    #[test]
    fn content_is_escaped_and_self_contained() {
        let d = doc(1);
        let e = ValidationError::at_item(ErrorLabel::UppercaseTitle, ValidationLevel::CsvWellformedness, 0, "title", 0);
        let html = render(&[e], &d);
        assert!(html.contains("Title &lt;0&gt;"));
        assert!(!html.contains("http://") && !html.contains("https://"));
        assert!(!html.contains("<link") && !html.contains("src="));
    }

    #[test]
    fn laminar_spans() {
        let mut spans = vec![
            CellSpan { error: 0, start: 0, end: 2 },
            CellSpan { error: 1, start: 1, end: 3 },
            CellSpan { error: 2, start: 5, end: 5 },
        ];
        make_laminar(&mut spans);
        assert_eq!((spans[0].start, spans[0].end), (0, 3));
        assert_eq!((spans[1].start, spans[1].end), (0, 3));
        assert_eq!((spans[2].start, spans[2].end), (5, 5));
    }

    #[test]
    fn unresolvable_position_is_rejected() {
        let d = doc(1);
        let mut buf = Vec::new();
        let r = emit_html(&[duplicate(&[5])], &d, VIEWER_STUB, &mut buf);
        assert!(matches!(r, Err(HtmlError::Position(_))));
    }
}
