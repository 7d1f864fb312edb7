//! Level 4: consistency between fields of a row, and between a META table
//! and a CITS table validated together.
//!
//! Every check takes a `skip(row, field, item)` predicate; items for which it
//! returns true failed an earlier level and are left alone.

use crate::catalog::{ErrorLabel, ValidationLevel};
use crate::config::RuleConfig;
use crate::report::{CrossError, LocatedIn, PositionTable, ValidationError};
use crate::table::{Row, TableDocument, TableKind};
use crate::wellformed::id_key;
use std::collections::{BTreeMap, HashMap};

const LEVEL: ValidationLevel = ValidationLevel::Semantics;

/// Id items whose scheme is not allowed for the row's publication type.
pub fn check_type_id_compatibility(
    row: &Row,
    config: &RuleConfig,
    skip: impl Fn(usize, &str, usize) -> bool,
) -> Vec<ValidationError> {
    let (Some(id), Some(type_cell)) = (row.cell("id"), row.cell("type")) else {
        return Vec::new();
    };
    let Some(allowed) = type_cell
        .value()
        .filter(|_| !skip(row.index, "type", 0))
        .and_then(|t| config.type_id_compatibility.get(t))
    else {
        return Vec::new();
    };
    id.items
        .iter()
        .filter(|item| !skip(row.index, "id", item.index))
        .filter(|item| item.identifiers().any(|(scheme, _)| !allowed.contains(scheme)))
        .map(|item| {
            let mut table = PositionTable::new();
            table.add(row.index, "id", [item.index]);
            table.add(row.index, "type", [0]);
            ValidationError::new(ErrorLabel::TypeIdMismatch, LEVEL, LocatedIn::Field, table)
        })
        .collect()
}

fn positive_int(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok().filter(|n| *n > 0)
}

/// Numeric page ranges whose start exceeds their end.
pub fn check_page_interval(row: &Row, skip: impl Fn(usize, &str, usize) -> bool) -> Vec<ValidationError> {
    let Some(page) = row.value("page").filter(|_| !skip(row.index, "page", 0)) else {
        return Vec::new();
    };
    let Some((start, end)) = page.split_once('-') else {
        return Vec::new();
    };
    match (positive_int(start), positive_int(end)) {
        (Some(s), Some(e)) if s > e => vec![ValidationError::at_item(
            ErrorLabel::PageInterval,
            LEVEL,
            row.index,
            "page",
            0,
        )],
        _ => Vec::new(),
    }
}

/// Volume or issue without a venue, and a venue on a type that has none.
pub fn check_container_consistency(
    row: &Row,
    config: &RuleConfig,
    skip: impl Fn(usize, &str, usize) -> bool,
) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    let venue = row.cell("venue").filter(|c| !c.is_empty());
    match venue {
        None => {
            let present: Vec<&str> = ["volume", "issue"]
                .into_iter()
                .filter(|f| row.value(f).is_some())
                .collect();
            if !present.is_empty() {
                let mut table = PositionTable::new();
                for f in present {
                    table.add(row.index, f, [0]);
                }
                table.add(row.index, "venue", []);
                errors.push(ValidationError::new(
                    ErrorLabel::ContainerWithoutVenue,
                    LEVEL,
                    LocatedIn::Field,
                    table,
                ));
            }
        }
        Some(venue) => {
            let clean = venue.items.iter().all(|i| !skip(row.index, "venue", i.index));
            let containerless = row
                .value("type")
                .filter(|_| !skip(row.index, "type", 0))
                .is_some_and(|t| config.containerless_types.contains(t));
            if clean && containerless {
                let mut table = PositionTable::new();
                table.add(row.index, "venue", venue.item_indices());
                table.add(row.index, "type", [0]);
                errors.push(ValidationError::new(
                    ErrorLabel::VenueTypeMismatch,
                    LEVEL,
                    LocatedIn::Field,
                    table,
                ));
            }
        }
    }
    errors
}

/// Identifiers shared by the citing and the cited side of one citation.
pub fn check_self_citation(row: &Row, skip: impl Fn(usize, &str, usize) -> bool) -> Vec<ValidationError> {
    let (Some(citing), Some(cited)) = (row.cell("citing_id"), row.cell("cited_id")) else {
        return Vec::new();
    };
    let keys = |cell: &crate::table::Cell| -> Vec<(usize, (String, String))> {
        cell.items
            .iter()
            .filter(|i| !skip(row.index, &cell.field_name, i.index))
            .flat_map(|i| i.identifiers().map(move |(s, v)| (i.index, id_key(s, v))))
            .collect()
    };
    let (a, b) = (keys(citing), keys(cited));
    let shared_items = |mine: &[(usize, (String, String))], theirs: &[(usize, (String, String))]| -> Vec<usize> {
        mine.iter()
            .filter(|(_, k)| theirs.iter().any(|(_, o)| o == k))
            .map(|(i, _)| *i)
            .collect()
    };
    let (in_citing, in_cited) = (shared_items(&a, &b), shared_items(&b, &a));
    if in_citing.is_empty() {
        return Vec::new();
    }
    let mut table = PositionTable::new();
    table.add(row.index, "citing_id", in_citing);
    table.add(row.index, "cited_id", in_cited);
    vec![ValidationError::new(ErrorLabel::SelfCitation, LEVEL, LocatedIn::Field, table)]
}

/// All row-local semantic checks for one row.
pub fn check_row(
    row: &Row,
    kind: TableKind,
    config: &RuleConfig,
    skip: impl Fn(usize, &str, usize) -> bool,
) -> Vec<ValidationError> {
    match kind {
        TableKind::Meta => {
            let mut errors = check_type_id_compatibility(row, config, &skip);
            errors.extend(check_page_interval(row, &skip));
            errors.extend(check_container_consistency(row, config, &skip));
            errors
        }
        TableKind::Cits => check_self_citation(row, &skip),
    }
}

/// Two dates agree when they are equal or one extends the other at a
/// hyphen boundary (`2020` and `2020-05-01`).
pub fn dates_compatible(a: &str, b: &str) -> bool {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    long == short || (long.starts_with(short) && long.as_bytes()[short.len()] == b'-')
}

/// Cross-document rules: every CITS identifier must be described in the
/// META table, and matched resources must agree on their publication date.
pub fn cross_validate(
    meta: &TableDocument,
    cits: &TableDocument,
    meta_skip: impl Fn(usize, &str, usize) -> bool,
    cits_skip: impl Fn(usize, &str, usize) -> bool,
) -> Vec<CrossError> {
    let mut index: HashMap<(String, String), Vec<(usize, usize)>> = HashMap::new();
    for row in &meta.rows {
        let Some(cell) = row.cell("id") else { continue };
        for item in cell.items.iter().filter(|i| !meta_skip(row.index, "id", i.index)) {
            for (s, v) in item.identifiers() {
                index.entry(id_key(s, v)).or_default().push((row.index, item.index));
            }
        }
    }

    let mut errors = Vec::new();
    for row in &cits.rows {
        for (id_field, date_field) in [
            ("citing_id", "citing_publication_date"),
            ("cited_id", "cited_publication_date"),
        ] {
            let Some(cell) = row.cell(id_field) else { continue };
            // META row → (matched META id items, matching CITS items)
            let mut matches: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
            for item in cell.items.iter().filter(|i| !cits_skip(row.index, id_field, i.index)) {
                for (s, v) in item.identifiers() {
                    match index.get(&id_key(s, v)) {
                        None => {
                            let mut table = PositionTable::new();
                            table.add(row.index, id_field, [item.index]);
                            errors.push(CrossError::new(
                                ErrorLabel::UnmatchedCitationId,
                                LocatedIn::Item,
                                PositionTable::new(),
                                table,
                            ));
                        }
                        Some(owners) => {
                            for &(meta_row, meta_item) in owners {
                                let entry = matches.entry(meta_row).or_default();
                                entry.0.push(meta_item);
                                entry.1.push(item.index);
                            }
                        }
                    }
                }
            }
            let cits_date = row.value(date_field).filter(|_| !cits_skip(row.index, date_field, 0));
            let Some(cits_date) = cits_date else { continue };
            for (meta_row, (meta_items, cits_items)) in matches {
                let meta_date = meta.rows[meta_row]
                    .value("pub_date")
                    .filter(|_| !meta_skip(meta_row, "pub_date", 0));
                match meta_date {
                    Some(d) if !dates_compatible(d, cits_date) => {
                        let mut m = PositionTable::new();
                        m.add(meta_row, "id", meta_items);
                        m.add(meta_row, "pub_date", [0]);
                        let mut c = PositionTable::new();
                        c.add(row.index, id_field, cits_items);
                        c.add(row.index, date_field, [0]);
                        errors.push(CrossError::new(ErrorLabel::DateMismatch, LocatedIn::Field, m, c));
                    }
                    _ => {}
                }
            }
        }
    }
    crate::report::sort_cross_errors(&mut errors, meta, cits);
    errors
}
