//! Layered table model for META-CSV and CITS-CSV documents.
//!
//! A document is a list of rows; every row has one cell per header column;
//! a cell holds zero or more items (the minimal unit that gets validated);
//! an item is broken down into typed components. Parsing never validates:
//! malformed content is kept verbatim so the rule levels can report it with
//! an exact position.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Column set of a META-CSV table, in canonical order.
pub const META_HEADER: [&str; 11] = [
    "id",
    "title",
    "author",
    "pub_date",
    "venue",
    "volume",
    "issue",
    "page",
    "type",
    "publisher",
    "editor",
];

/// Column set of a CITS-CSV table, in canonical order.
pub const CITS_HEADER: [&str; 4] = [
    "citing_id",
    "citing_publication_date",
    "cited_id",
    "cited_publication_date",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Meta,
    Cits,
}

impl TableKind {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            TableKind::Meta => &META_HEADER,
            TableKind::Cits => &CITS_HEADER,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TableKind::Meta => "meta",
            TableKind::Cits => "cits",
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("input is not valid UTF-8 (invalid byte sequence at offset {offset})")]
    Decode { offset: usize },
    #[error("input is empty: a header row is required")]
    MissingHeader,
    #[error("malformed CSV at line {line}: expected {expected} fields, found {found}")]
    MalformedCsv {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("unrecognised table header (missing: {missing:?}, unexpected: {extra:?})")]
    UnknownTableType {
        missing: Vec<String>,
        extra: Vec<String>,
    },
}

/// How the content of a column is broken into items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldShape {
    /// Space-separated `scheme:value` identifiers.
    IdList,
    /// `; `-separated people or organisations, each `Name [ids]`.
    AgentList,
    /// `; `-separated venues, each `Name [ids]`.
    VenueList,
    /// The whole cell is one item of the given kind.
    Single(ComponentKind),
}

pub fn field_shape(field_name: &str) -> FieldShape {
    match field_name {
        "id" | "citing_id" | "cited_id" => FieldShape::IdList,
        "author" | "editor" | "publisher" => FieldShape::AgentList,
        "venue" => FieldShape::VenueList,
        "title" => FieldShape::Single(ComponentKind::TitleValue),
        "pub_date" | "citing_publication_date" | "cited_publication_date" => {
            FieldShape::Single(ComponentKind::DateValue)
        }
        "volume" => FieldShape::Single(ComponentKind::VolumeValue),
        "issue" => FieldShape::Single(ComponentKind::IssueValue),
        "page" => FieldShape::Single(ComponentKind::PageRange),
        "type" => FieldShape::Single(ComponentKind::TypeValue),
        _ => FieldShape::Single(ComponentKind::PlainName),
    }
}

/// Delimiter used to join the items of a field.
pub fn field_delimiter(field_name: &str) -> &'static str {
    match field_shape(field_name) {
        FieldShape::IdList => " ",
        FieldShape::AgentList | FieldShape::VenueList => "; ",
        FieldShape::Single(_) => "",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    PlainName,
    GivenName,
    FamilyName,
    Identifier,
    DateValue,
    PageRange,
    TypeValue,
    VolumeValue,
    IssueValue,
    TitleValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub kind: ComponentKind,
    pub value: String,
    /// Lowercased scheme name; only set on identifiers.
    pub scheme: Option<String>,
}

impl Component {
    fn new(kind: ComponentKind, value: impl Into<String>) -> Self {
        Component {
            kind,
            value: value.into(),
            scheme: None,
        }
    }

    fn identifier(scheme: String, value: String) -> Self {
        Component {
            kind: ComponentKind::Identifier,
            value,
            scheme: Some(scheme),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub index: usize,
    pub raw: String,
    pub components: Vec<Component>,
}

impl Item {
    pub fn identifiers(&self) -> impl Iterator<Item = (&str, &str)> {
        self.components.iter().filter_map(|c| {
            c.scheme
                .as_deref()
                .map(|scheme| (scheme, c.value.as_str()))
        })
    }

    pub fn component(&self, kind: ComponentKind) -> Option<&Component> {
        self.components.iter().find(|c| c.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub row_index: usize,
    pub field_name: String,
    pub raw: String,
    pub items: Vec<Item>,
}

impl Cell {
    pub fn new(row_index: usize, field_name: &str, raw: &str) -> Self {
        let items = split_items(raw, field_name)
            .into_iter()
            .enumerate()
            .map(|(index, item_raw)| parse_item(index, item_raw, field_name))
            .collect();
        Cell {
            row_index,
            field_name: field_name.to_string(),
            raw: raw.to_string(),
            items,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The single trimmed value of a single-item field, if any.
    pub fn value(&self) -> Option<&str> {
        self.items.first().map(|i| i.raw.as_str())
    }

    pub fn item_indices(&self) -> Vec<usize> {
        (0..self.items.len()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub index: usize,
    /// 1-based line of the record in the source file.
    pub line: u64,
    pub cells: Vec<Cell>,
}

impl Row {
    pub fn cell(&self, field_name: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.field_name == field_name)
    }

    /// Trimmed value of a single-item field; `None` when empty or absent.
    pub fn value(&self, field_name: &str) -> Option<&str> {
        self.cell(field_name).and_then(Cell::value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDocument {
    pub kind: TableKind,
    pub header: Vec<String>,
    pub rows: Vec<Row>,
}

impl TableDocument {
    /// Column position of `field_name` in the source header.
    pub fn field_position(&self, field_name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == field_name)
    }

    pub fn item(&self, row: usize, field: &str, item: usize) -> Option<&Item> {
        self.rows
            .get(row)
            .and_then(|r| r.cell(field))
            .and_then(|c| c.items.get(item))
    }
}

/// Compare a header against both known column sets.
///
/// Comparison ignores column order but is case-sensitive; duplicated
/// columns count as unexpected.
pub fn detect_table_type<S: AsRef<str>>(header: &[S]) -> Result<TableKind, TableError> {
    let meta = header_diff(TableKind::Meta, header);
    let cits = header_diff(TableKind::Cits, header);
    if meta.0.is_empty() && meta.1.is_empty() {
        return Ok(TableKind::Meta);
    }
    if cits.0.is_empty() && cits.1.is_empty() {
        return Ok(TableKind::Cits);
    }
    // report against the kind sharing more columns with the header
    let shared = |kind: TableKind, missing: usize| kind.header().len() - missing;
    let (missing, extra) = if shared(TableKind::Meta, meta.0.len()) >= shared(TableKind::Cits, cits.0.len()) {
        meta
    } else {
        cits
    };
    Err(TableError::UnknownTableType { missing, extra })
}

/// Check that `header` is exactly the column set of `kind`.
pub fn check_header<S: AsRef<str>>(kind: TableKind, header: &[S]) -> Result<(), TableError> {
    let (missing, extra) = header_diff(kind, header);
    if missing.is_empty() && extra.is_empty() {
        Ok(())
    } else {
        Err(TableError::UnknownTableType { missing, extra })
    }
}

fn header_diff<S: AsRef<str>>(kind: TableKind, header: &[S]) -> (Vec<String>, Vec<String>) {
    let expected = kind.header();
    let missing = expected
        .iter()
        .filter(|name| !header.iter().any(|h| h.as_ref() == **name))
        .map(|name| name.to_string())
        .collect();
    let mut seen: Vec<&str> = Vec::new();
    let mut extra = Vec::new();
    for h in header {
        let h = h.as_ref();
        if !expected.contains(&h) || seen.contains(&h) {
            extra.push(h.to_string());
        }
        seen.push(h);
    }
    (missing, extra)
}

/// Parse CSV bytes and autodetect the table kind from the header.
pub fn parse_table(csv_bytes: &[u8]) -> Result<TableDocument, TableError> {
    parse_table_as(csv_bytes, None)
}

/// Parse CSV bytes; when `kind` is given the header must match that kind.
pub fn parse_table_as(csv_bytes: &[u8], kind: Option<TableKind>) -> Result<TableDocument, TableError> {
    let text = std::str::from_utf8(csv_bytes).map_err(|e| TableError::Decode {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header: Vec<String> = match records.next() {
        None => return Err(TableError::MissingHeader),
        Some(rec) => rec
            .map_err(|e| TableError::Csv(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect(),
    };
    let kind = match kind {
        Some(k) => {
            check_header(k, &header)?;
            k
        }
        None => detect_table_type(&header)?,
    };

    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| TableError::Csv(e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(TableError::MalformedCsv {
                line,
                expected: header.len(),
                found: rec.len(),
            });
        }
        let index = rows.len();
        let cells = header
            .iter()
            .zip(rec.iter())
            .map(|(field, raw)| Cell::new(index, field, raw))
            .collect();
        rows.push(Row { index, line, cells });
    }

    Ok(TableDocument { kind, header, rows })
}

/// Split `s` at characters matching `is_sep` that are not inside square
/// brackets. Returned pieces are untrimmed slices of `s`.
fn split_outside_brackets(s: &str, is_sep: impl Fn(char) -> bool) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (pos, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            c if depth == 0 && is_sep(c) => {
                pieces.push(&s[start..pos]);
                start = pos + c.len_utf8();
            }
            _ => {}
        }
    }
    pieces.push(&s[start..]);
    pieces
}

/// Split a cell into item texts according to the field's delimiter.
///
/// Empty cells yield no items. In `; `-separated fields an empty piece
/// (e.g. a doubled separator) is kept as an empty item so that it can be
/// reported; in identifier fields runs of whitespace act as one separator.
pub fn split_items<'a>(cell_raw: &'a str, field_name: &str) -> Vec<&'a str> {
    let trimmed = cell_raw.trim();
    if trimmed.is_empty() {
        return Vec::new();
    }
    match field_shape(field_name) {
        FieldShape::IdList => split_outside_brackets(trimmed, char::is_whitespace)
            .into_iter()
            .filter(|p| !p.is_empty())
            .collect(),
        FieldShape::AgentList | FieldShape::VenueList => {
            split_outside_brackets(trimmed, |c| c == ';')
                .into_iter()
                .map(str::trim)
                .collect()
        }
        FieldShape::Single(_) => vec![trimmed],
    }
}

fn parse_item(index: usize, raw: &str, field_name: &str) -> Item {
    match field_shape(field_name) {
        FieldShape::IdList => Item {
            index,
            raw: raw.to_string(),
            components: parse_id_item(raw).into_iter().collect(),
        },
        FieldShape::AgentList => parse_agent_item(index, raw),
        FieldShape::VenueList => parse_venue_item(index, raw),
        FieldShape::Single(kind) => Item {
            index,
            raw: raw.to_string(),
            components: vec![Component::new(kind, raw)],
        },
    }
}

/// Name part and bracketed identifier list of a `Name [ids]` item.
///
/// Lenient: an unclosed bracket runs to the end of the item. Strict grammar
/// checks belong to the wellformedness level.
pub fn split_name_and_ids(item_raw: &str) -> (&str, Option<&str>) {
    match item_raw.find('[') {
        None => (item_raw.trim(), None),
        Some(open) => {
            let rest = &item_raw[open + 1..];
            let inner = match rest.rfind(']') {
                Some(close) => &rest[..close],
                None => rest,
            };
            (item_raw[..open].trim(), Some(inner))
        }
    }
}

fn bracket_identifiers(list: Option<&str>) -> Vec<Component> {
    list.map(|l| {
        l.split_whitespace()
            .filter_map(|id| parse_id_item(id).ok())
            .collect()
    })
    .unwrap_or_default()
}

/// Parse a responsible-agent item (`Family, Given [ids]` or `Organisation [ids]`).
pub fn parse_agent_item(index: usize, item_raw: &str) -> Item {
    let (name, ids) = split_name_and_ids(item_raw);
    let mut components = Vec::new();
    match name.split_once(',') {
        Some((family, given)) => {
            let (family, given) = (family.trim(), given.trim());
            if !family.is_empty() {
                components.push(Component::new(ComponentKind::FamilyName, family));
            }
            if !given.is_empty() {
                components.push(Component::new(ComponentKind::GivenName, given));
            }
        }
        None if !name.is_empty() => {
            components.push(Component::new(ComponentKind::PlainName, name));
        }
        None => {}
    }
    components.extend(bracket_identifiers(ids));
    Item {
        index,
        raw: item_raw.to_string(),
        components,
    }
}

/// Parse a venue item (`Name [ids]`); the name is never split.
pub fn parse_venue_item(index: usize, item_raw: &str) -> Item {
    let (name, ids) = split_name_and_ids(item_raw);
    let mut components = Vec::new();
    if !name.is_empty() {
        components.push(Component::new(ComponentKind::PlainName, name));
    }
    components.extend(bracket_identifiers(ids));
    Item {
        index,
        raw: item_raw.to_string(),
        components,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IdItemError {
    #[error("identifier has no scheme separator ':'")]
    MissingSchemeSeparator,
    #[error("identifier has an empty scheme")]
    EmptyScheme,
    #[error("identifier has an empty value")]
    EmptyValue,
}

/// Split `scheme:value` at the first colon. The scheme is lowercased, the
/// value kept verbatim.
pub fn parse_id_item(item_raw: &str) -> Result<Component, IdItemError> {
    let (scheme, value) = item_raw
        .split_once(':')
        .ok_or(IdItemError::MissingSchemeSeparator)?;
    if scheme.is_empty() {
        return Err(IdItemError::EmptyScheme);
    }
    if value.is_empty() {
        return Err(IdItemError::EmptyValue);
    }
    Ok(Component::identifier(
        scheme.to_ascii_lowercase(),
        value.to_string(),
    ))
}
