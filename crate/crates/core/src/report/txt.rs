use super::{ValidationError, ValidationReport};
use crate::catalog::{self, ErrorLabel, ErrorType};
use std::collections::BTreeMap;
use std::io::{self, Write};

/// Human-readable digest of a report.
///
/// First a table of labels with severity and count (errors before
/// warnings, each by descending count), each followed by its message,
/// then one line per finding with its location.
pub fn emit_txt_summary<W: Write>(report: &ValidationReport, mut out: W) -> io::Result<()> {
    if report.errors.is_empty() {
        return writeln!(out, "No errors detected.");
    }

    writeln!(
        out,
        "{} error(s) and {} warning(s) found in {} table.",
        report.error_count(),
        report.warning_count(),
        report.table_kind.as_str().to_uppercase()
    )?;
    writeln!(out)?;

    for (label, error_type, count) in label_counts(&report.errors) {
        writeln!(out, "{label}  {error_type}  {count}")?;
        let level = report
            .errors
            .iter()
            .find(|e| e.error_label == label)
            .map(|e| e.validation_level)
            .expect("label counted from the report");
        writeln!(out, "    {}", catalog::message(label, level))?;
    }

    writeln!(out)?;
    writeln!(out, "Locations:")?;
    for (n, e) in report.errors.iter().enumerate() {
        writeln!(
            out,
            "{:>4}. {} ({}, {}) in {:?}: {}",
            n + 1,
            e.error_label,
            e.error_type,
            e.validation_level,
            e.position.located_in,
            describe_position(e)
        )?;
    }
    Ok(())
}

/// Labels with severity and count, errors first, then by descending count.
pub(crate) fn label_counts(errors: &[ValidationError]) -> Vec<(ErrorLabel, ErrorType, usize)> {
    let mut counts: BTreeMap<ErrorLabel, usize> = BTreeMap::new();
    for e in errors {
        *counts.entry(e.error_label).or_default() += 1;
    }
    let mut rows: Vec<_> = counts
        .into_iter()
        .map(|(label, n)| (label, label.severity(), n))
        .collect();
    rows.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(b.2.cmp(&a.2))
            .then(a.0.as_str().cmp(b.0.as_str()))
    });
    rows
}

fn describe_position(e: &ValidationError) -> String {
    let mut parts = Vec::new();
    for (row, field, items) in e.position.table.pairs() {
        let items = items
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        parts.push(format!("row {row} {field}[{items}]"));
    }
    parts.join("; ")
}
