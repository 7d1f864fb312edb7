//! Level 1: compliance with the META-CSV / CITS-CSV syntax.

use crate::catalog::{ErrorLabel, ValidationLevel};
use crate::config::RuleConfig;
use crate::report::{LocatedIn, PositionTable, ValidationError};
use crate::table::{field_shape, parse_id_item, split_name_and_ids, Cell, FieldShape, Row, TableDocument, TableKind};
use chrono::NaiveDate;
use regex::Regex;
use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

const LEVEL: ValidationLevel = ValidationLevel::CsvWellformedness;

fn item_error(label: ErrorLabel, cell: &Cell, item: usize) -> ValidationError {
    ValidationError::at_item(label, LEVEL, cell.row_index, &cell.field_name, item)
}

/// `Name` or `Name [id id ...]`: one space before the bracket, single
/// spaces between identifiers, nothing after the closing bracket.
fn named_item_grammar() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^([^\[\]\s;](?:[^\[\];]*[^\[\]\s;])?)(?: \[([^\[\]\s]+(?: [^\[\]\s]+)*)\])?$").expect("valid regex")
    })
}

/// Whether an author/editor/publisher item follows the agent grammar.
pub fn is_wellformed_agent(item_raw: &str) -> bool {
    match named_item_grammar().captures(item_raw) {
        None => false,
        Some(caps) => {
            let name = &caps[1];
            // "Family, Given": the family name may not be empty
            match name.split_once(',') {
                Some((family, _)) => !family.trim().is_empty(),
                None => true,
            }
        }
    }
}

pub fn is_wellformed_venue(item_raw: &str) -> bool {
    named_item_grammar().is_match(item_raw)
}

/// Identifier tokens of a well-formed `Name [ids]` item.
fn bracket_tokens(item_raw: &str) -> Vec<&str> {
    split_name_and_ids(item_raw)
        .1
        .map(|l| l.split(' ').collect())
        .unwrap_or_default()
}

/// Wrong `scheme:value` shape or unsupported scheme in id cells and in the
/// bracketed lists of agent and venue cells.
pub fn check_id_wellformedness(cell: &Cell, config: &RuleConfig) -> Vec<ValidationError> {
    let supported = |token: &str, schemes: &std::collections::BTreeSet<String>| {
        parse_id_item(token)
            .ok()
            .and_then(|c| c.scheme)
            .is_some_and(|s| schemes.contains(&s))
    };
    match field_shape(&cell.field_name) {
        FieldShape::IdList => cell
            .items
            .iter()
            .filter(|item| !supported(&item.raw, &config.br_schemes))
            .map(|item| item_error(ErrorLabel::BrIdFormat, cell, item.index))
            .collect(),
        FieldShape::AgentList => cell
            .items
            .iter()
            .filter(|item| is_wellformed_agent(&item.raw))
            .filter(|item| bracket_tokens(&item.raw).iter().any(|t| !supported(t, &config.ra_schemes)))
            .map(|item| item_error(ErrorLabel::RaIdFormat, cell, item.index))
            .collect(),
        FieldShape::VenueList => cell
            .items
            .iter()
            .filter(|item| is_wellformed_venue(&item.raw))
            .filter(|item| bracket_tokens(&item.raw).iter().any(|t| !supported(t, &config.br_schemes)))
            .map(|item| item_error(ErrorLabel::BrIdFormat, cell, item.index))
            .collect(),
        FieldShape::Single(_) => Vec::new(),
    }
}

/// `YYYY`, `YYYY-MM` or `YYYY-MM-DD` naming an existing calendar date.
pub fn is_valid_date(value: &str) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"^(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?$").expect("valid regex"));
    let Some(caps) = re.captures(value) else {
        return false;
    };
    let year: i32 = caps[1].parse().expect("four digits");
    let month: u32 = caps.get(2).map_or(1, |m| m.as_str().parse().expect("two digits"));
    let day: u32 = caps.get(3).map_or(1, |m| m.as_str().parse().expect("two digits"));
    NaiveDate::from_ymd_opt(year, month, day).is_some()
}

pub fn check_date_wellformedness(cell: &Cell) -> Vec<ValidationError> {
    cell.items
        .iter()
        .filter(|item| !is_valid_date(&item.raw))
        .map(|item| item_error(ErrorLabel::DateFormat, cell, item.index))
        .collect()
}

pub fn is_valid_page(value: &str) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z0-9]+-[A-Za-z0-9]+$").expect("valid regex"))
        .is_match(value)
}

pub fn check_page_format(cell: &Cell) -> Vec<ValidationError> {
    cell.items
        .iter()
        .filter(|item| !is_valid_page(&item.raw))
        .map(|item| item_error(ErrorLabel::PageFormat, cell, item.index))
        .collect()
}

pub fn check_people_item_format(cell: &Cell) -> Vec<ValidationError> {
    cell.items
        .iter()
        .filter(|item| !is_wellformed_agent(&item.raw))
        .map(|item| item_error(ErrorLabel::PeopleItemFormat, cell, item.index))
        .collect()
}

pub fn check_venue_format(cell: &Cell) -> Vec<ValidationError> {
    cell.items
        .iter()
        .filter(|item| !is_wellformed_venue(&item.raw))
        .map(|item| item_error(ErrorLabel::VenueFormat, cell, item.index))
        .collect()
}

/// Title with at least one letter and no lowercase letter.
pub fn is_uppercase_title(title: &str) -> bool {
    title.chars().any(char::is_alphabetic) && !title.chars().any(char::is_lowercase)
}

pub fn check_uppercase_title(row: &Row) -> Vec<ValidationError> {
    match row.cell("title") {
        Some(cell) if cell.value().is_some_and(is_uppercase_title) => {
            vec![item_error(ErrorLabel::UppercaseTitle, cell, 0)]
        }
        _ => Vec::new(),
    }
}

/// Missing minimal identification and out-of-vocabulary types.
pub fn check_required_and_vocab(row: &Row, kind: TableKind, config: &RuleConfig) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    let empty = |f: &str| row.cell(f).map_or(true, Cell::is_empty);
    match kind {
        TableKind::Meta => {
            if empty("id") && empty("title") {
                let mut table = PositionTable::new();
                table.add(row.index, "id", []);
                table.add(row.index, "title", []);
                errors.push(ValidationError::new(ErrorLabel::RequiredField, LEVEL, LocatedIn::Row, table));
            }
            if let Some(cell) = row.cell("type") {
                if cell.value().is_some_and(|t| !config.type_vocabulary.contains(t)) {
                    errors.push(item_error(ErrorLabel::TypeVocab, cell, 0));
                }
            }
        }
        TableKind::Cits => {
            let missing: Vec<&str> = ["citing_id", "cited_id"].into_iter().filter(|f| empty(f)).collect();
            if !missing.is_empty() {
                let mut table = PositionTable::new();
                for f in missing {
                    table.add(row.index, f, []);
                }
                errors.push(ValidationError::new(ErrorLabel::RequiredField, LEVEL, LocatedIn::Field, table));
            }
        }
    }
    errors
}

/// Identity of an identifier for equality purposes: lowercased scheme, and
/// lowercased value for case-insensitive schemes.
pub fn id_key(scheme: &str, value: &str) -> (String, String) {
    let scheme = scheme.to_ascii_lowercase();
    let value = match scheme.as_str() {
        "doi" | "orcid" | "issn" | "isbn" => value.to_ascii_uppercase(),
        _ => value.to_string(),
    };
    (scheme, value)
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut x = x;
        while self.0[x] != root {
            let next = self.0[x];
            self.0[x] = root;
            x = next;
        }
        root
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
    /// Groups with at least two members, members ascending, groups by first member.
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.0.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().filter(|g| g.len() > 1).collect()
    }
}

/// `duplicate_br` across rows sharing an identifier (rows linked through a
/// chain of shared identifiers form one finding) and `duplicate_ra` inside
/// agent cells. `skip(row, field, item)` excludes items that already failed
/// a format check.
pub fn check_duplicates(document: &TableDocument, skip: impl Fn(usize, &str, usize) -> bool) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    if document.kind != TableKind::Meta {
        return errors;
    }

    let mut owners: HashMap<(String, String), usize> = HashMap::new();
    let mut rows = DisjointSet::new(document.rows.len());
    for row in &document.rows {
        let Some(cell) = row.cell("id") else { continue };
        for item in &cell.items {
            if skip(row.index, "id", item.index) {
                continue;
            }
            for (scheme, value) in item.identifiers() {
                match owners.entry(id_key(scheme, value)) {
                    std::collections::hash_map::Entry::Occupied(e) => rows.union(*e.get(), row.index),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(row.index);
                    }
                }
            }
        }
    }
    for group in rows.groups() {
        let mut table = PositionTable::new();
        for r in group {
            let cell = document.rows[r].cell("id").expect("grouped rows have ids");
            table.add(r, "id", cell.item_indices());
        }
        errors.push(ValidationError::new(ErrorLabel::DuplicateBr, LEVEL, LocatedIn::Row, table));
    }

    for row in &document.rows {
        for field in ["author", "editor", "publisher"] {
            if let Some(cell) = row.cell(field) {
                errors.extend(duplicate_agents(cell, |i| skip(row.index, field, i)));
            }
        }
    }
    errors
}

fn normalized_name(item_raw: &str) -> String {
    split_name_and_ids(item_raw)
        .0
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Agents in one cell are the same when their normalized names are equal
/// or they share an identifier.
fn duplicate_agents(cell: &Cell, skip: impl Fn(usize) -> bool) -> Vec<ValidationError> {
    let items: Vec<_> = cell.items.iter().filter(|i| !skip(i.index)).collect();
    let mut set = DisjointSet::new(items.len());
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut by_id: HashMap<(String, String), usize> = HashMap::new();
    for (k, item) in items.iter().enumerate() {
        let name = normalized_name(&item.raw);
        if !name.is_empty() {
            if let Some(&other) = by_name.get(&name) {
                set.union(other, k);
            } else {
                by_name.insert(name, k);
            }
        }
        for (scheme, value) in item.identifiers() {
            let key = id_key(scheme, value);
            if let Some(&other) = by_id.get(&key) {
                set.union(other, k);
            } else {
                by_id.insert(key, k);
            }
        }
    }
    set.groups()
        .into_iter()
        .map(|group| {
            let mut table = PositionTable::new();
            table.add(cell.row_index, &cell.field_name, group.into_iter().map(|k| items[k].index));
            ValidationError::new(ErrorLabel::DuplicateRa, LEVEL, LocatedIn::Item, table)
        })
        .collect()
}

/// All row-local level-1 checks for one row.
pub fn check_row(row: &Row, kind: TableKind, config: &RuleConfig) -> Vec<ValidationError> {
    let mut errors = check_required_and_vocab(row, kind, config);
    for cell in &row.cells {
        match cell.field_name.as_str() {
            "id" | "citing_id" | "cited_id" => errors.extend(check_id_wellformedness(cell, config)),
            "author" | "editor" | "publisher" => {
                errors.extend(check_people_item_format(cell));
                errors.extend(check_id_wellformedness(cell, config));
            }
            "venue" => {
                errors.extend(check_venue_format(cell));
                errors.extend(check_id_wellformedness(cell, config));
            }
            "pub_date" | "citing_publication_date" | "cited_publication_date" => {
                errors.extend(check_date_wellformedness(cell))
            }
            "page" => errors.extend(check_page_format(cell)),
            _ => {}
        }
    }
    if kind == TableKind::Meta {
        errors.extend(check_uppercase_title(row));
    }
    errors
}
