//! Validation findings, their position descriptors, and report emitters.

mod html;
mod position;
mod txt;

pub use html::{emit_html, HtmlError, VIEWER_STUB};
pub(crate) use html::escape;
pub use position::{LocatedIn, Position, PositionTable};
pub use txt::emit_txt_summary;

use crate::catalog::{self, ErrorLabel, ErrorType, ValidationLevel};
use crate::table::{TableDocument, TableKind};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// One detected issue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationError {
    pub validation_level: ValidationLevel,
    pub error_type: ErrorType,
    pub error_label: ErrorLabel,
    pub valid: bool,
    pub message: String,
    pub position: Position,
}

impl ValidationError {
    /// Build a finding whose severity and message come from the catalog.
    pub fn new(
        label: ErrorLabel,
        level: ValidationLevel,
        located_in: LocatedIn,
        table: PositionTable,
    ) -> Self {
        ValidationError {
            validation_level: level,
            error_type: label.severity(),
            error_label: label,
            valid: false,
            message: catalog::message(label, level).to_string(),
            position: Position { located_in, table },
        }
    }

    /// Finding located in a single item.
    pub fn at_item(label: ErrorLabel, level: ValidationLevel, row: usize, field: &str, item: usize) -> Self {
        let mut table = PositionTable::new();
        table.add(row, field, [item]);
        ValidationError::new(label, level, LocatedIn::Item, table)
    }

    pub fn is_error(&self) -> bool {
        self.error_type == ErrorType::Error
    }
}

/// A finding of the cross-document phase, positioned in both tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossError {
    pub validation_level: ValidationLevel,
    pub error_type: ErrorType,
    pub error_label: ErrorLabel,
    pub valid: bool,
    pub message: String,
    pub position: CrossPosition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossPosition {
    pub located_in: LocatedIn,
    pub meta: PositionTable,
    pub cits: PositionTable,
}

impl CrossError {
    pub fn new(label: ErrorLabel, located_in: LocatedIn, meta: PositionTable, cits: PositionTable) -> Self {
        let level = ValidationLevel::Semantics;
        CrossError {
            validation_level: level,
            error_type: label.severity(),
            error_label: label,
            valid: false,
            message: catalog::message(label, level).to_string(),
            position: CrossPosition {
                located_in,
                meta,
                cits,
            },
        }
    }
}

/// Sort cross findings by CITS position first, then META position.
pub fn sort_cross_errors(errors: &mut [CrossError], meta: &TableDocument, cits: &TableDocument) {
    for e in errors.iter_mut() {
        e.position.meta.sort_fields(|f| meta.field_position(f));
        e.position.cits.sort_fields(|f| cits.field_position(f));
    }
    errors.sort_by_cached_key(|e| {
        (
            e.position.cits.sort_key(cits),
            e.position.meta.sort_key(meta),
            e.error_label,
            serde_json::to_string(&e.position).unwrap_or_default(),
        )
    });
}

/// All findings of one validation run plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
    pub input_path: String,
    pub table_kind: TableKind,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub levels_run: Vec<ValidationLevel>,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        self.errors.iter().filter(|e| e.is_error()).count()
    }

    pub fn warning_count(&self) -> usize {
        self.errors.len() - self.error_count()
    }

    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }

    /// Put findings and their position fields in canonical order: first row,
    /// then field (header order), then item, then label.
    pub fn finalize(&mut self, document: &TableDocument) {
        canonicalize(&mut self.errors, document);
    }

    pub fn count(&self, label: ErrorLabel) -> usize {
        self.errors.iter().filter(|e| e.error_label == label).count()
    }
}

pub fn canonicalize(errors: &mut [ValidationError], document: &TableDocument) {
    for e in errors.iter_mut() {
        e.position.table.sort_fields(|f| document.field_position(f));
    }
    errors.sort_by_cached_key(|e| {
        (
            e.position.table.sort_key(document),
            e.error_label,
            serde_json::to_string(&e.position).unwrap_or_default(),
        )
    });
}

fn pretty<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> io::Result<()> {
    let formatter = serde_json::ser::PrettyFormatter::with_indent(b"    ");
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser).map_err(io::Error::from)?;
    out.write_all(b"\n")
}

/// Write the findings as a JSON list of error objects.
pub fn emit_json<W: Write>(report: &ValidationReport, out: W) -> io::Result<()> {
    pretty(out, &report.errors)
}

pub fn emit_cross_json<W: Write>(errors: &[CrossError], out: W) -> io::Result<()> {
    pretty(out, errors)
}

#[derive(Serialize)]
struct Metadata<'a> {
    input_path: &'a str,
    table_kind: TableKind,
    started_at: &'a DateTime<Utc>,
    finished_at: &'a DateTime<Utc>,
    levels_run: &'a [ValidationLevel],
    error_count: usize,
    warning_count: usize,
}

/// Run metadata, written next to the findings list.
pub fn emit_metadata<W: Write>(report: &ValidationReport, out: W) -> io::Result<()> {
    pretty(
        out,
        &Metadata {
            input_path: &report.input_path,
            table_kind: report.table_kind,
            started_at: &report.started_at,
            finished_at: &report.finished_at,
            levels_run: &report.levels_run,
            error_count: report.error_count(),
            warning_count: report.warning_count(),
        },
    )
}

pub fn parse_errors_json(bytes: &[u8]) -> serde_json::Result<Vec<ValidationError>> {
    serde_json::from_slice(bytes)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("finding #{index} ({label}) points at row {row}, field '{field}', item {item:?}, which is not in the source table")]
pub struct UnresolvedPosition {
    pub index: usize,
    pub label: ErrorLabel,
    pub row: usize,
    pub field: String,
    pub item: Option<usize>,
}

/// Check that every (row, field, item) of every finding exists in `document`.
pub fn check_positions(errors: &[ValidationError], document: &TableDocument) -> Result<(), UnresolvedPosition> {
    for (index, e) in errors.iter().enumerate() {
        for (row, field, items) in e.position.table.pairs() {
            let fail = |item| UnresolvedPosition {
                index,
                label: e.error_label,
                row,
                field: field.to_string(),
                item,
            };
            let cell = document
                .rows
                .get(row)
                .and_then(|r| r.cell(field))
                .ok_or_else(|| fail(None))?;
            if let Some(&bad) = items.iter().find(|&&i| i >= cell.items.len()) {
                return Err(fail(Some(bad)));
            }
        }
    }
    Ok(())
}
