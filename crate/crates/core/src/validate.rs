//! Validation runs: level sequencing, blocking, and pair validation.

use crate::catalog::{ErrorLabel, ValidationLevel};
use crate::config::RuleConfig;
use crate::idcheck::{
    resolve_batch, validate_id_syntax, HttpResolver, IdKey, IdSyntaxError, LookupCache, Resolver, VerdictStatus,
};
use crate::report::{CrossError, ValidationError, ValidationReport};
use crate::semantics;
use crate::table::{field_shape, parse_table_as, FieldShape, Item, TableDocument, TableError, TableKind};
use crate::wellformed::{self, id_key};
use chrono::Utc;
use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Table { path: PathBuf, source: TableError },
    #[error("cannot set up the registry client: {0}")]
    Resolver(String),
}

/// Rule groups and the levels their items must have passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Row-local wellformedness checks: always run.
    Wellformedness,
    /// Duplicate detection: only over items that are well formed.
    Duplicates,
    IdSyntax,
    IdExistence,
    Semantics,
}

impl Rule {
    pub fn prerequisites(self) -> &'static [ValidationLevel] {
        use ValidationLevel::*;
        match self {
            Rule::Wellformedness => &[],
            Rule::Duplicates | Rule::IdSyntax => &[CsvWellformedness],
            Rule::IdExistence | Rule::Semantics => &[CsvWellformedness, ExternalSyntax],
        }
    }
}

/// Levels at which each (row, field, item) produced an error.
#[derive(Debug, Clone, Default)]
pub struct ItemStatus {
    failed: HashMap<(usize, String, usize), BTreeSet<ValidationLevel>>,
}

impl ItemStatus {
    /// Record the items of blocking findings; warnings never block.
    pub fn record(&mut self, errors: &[ValidationError]) {
        for e in errors.iter().filter(|e| e.is_error()) {
            for (row, field, item) in e.position.table.items() {
                self.failed
                    .entry((row, field.to_string(), item))
                    .or_default()
                    .insert(e.validation_level);
            }
        }
    }

    pub fn failed_levels(&self, row: usize, field: &str, item: usize) -> Option<&BTreeSet<ValidationLevel>> {
        self.failed.get(&(row, field.to_string(), item))
    }

    pub fn has_failed(&self, row: usize, field: &str, item: usize, level: ValidationLevel) -> bool {
        self.failed_levels(row, field, item)
            .is_some_and(|levels| levels.contains(&level))
    }
}

/// Whether `rule` must not run on an item because it failed a prerequisite.
pub fn should_skip(row: usize, field: &str, item: usize, rule: Rule, status: &ItemStatus) -> bool {
    rule.prerequisites()
        .iter()
        .any(|level| status.has_failed(row, field, item, *level))
}

pub struct ValidateOptions {
    pub config: RuleConfig,
    pub resolver: Arc<dyn Resolver>,
    pub cache: Arc<LookupCache>,
    /// Skip table type detection and require this header.
    pub kind: Option<TableKind>,
}

impl ValidateOptions {
    /// Options using HTTP registries and the cache configured in `config`.
    pub fn from_config(config: RuleConfig) -> Result<Self, ValidateError> {
        let resolver = HttpResolver::new(
            config.resolvers.clone(),
            Duration::from_secs(config.limits.timeout_secs),
        )
        .map_err(|e| ValidateError::Resolver(e.to_string()))?;
        let cache = match &config.cache.path {
            Some(path) => LookupCache::open(path, config.cache.ttl_days),
            None => LookupCache::in_memory(),
        };
        Ok(ValidateOptions {
            config,
            resolver: Arc::new(resolver),
            cache: Arc::new(cache),
            kind: None,
        })
    }

    pub fn with_resolver(config: RuleConfig, resolver: Arc<dyn Resolver>) -> Self {
        ValidateOptions {
            config,
            resolver,
            cache: Arc::new(LookupCache::in_memory()),
            kind: None,
        }
    }
}

/// A parsed document with its report and per-item failures.
pub struct Validated {
    pub document: TableDocument,
    pub report: ValidationReport,
    pub status: ItemStatus,
}

pub fn load_document(path: &Path, kind: Option<TableKind>) -> Result<TableDocument, ValidateError> {
    let bytes = std::fs::read(path).map_err(|source| ValidateError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_table_as(&bytes, kind).map_err(|source| ValidateError::Table {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse and validate one file.
pub fn validate_document(path: &Path, options: &ValidateOptions) -> Result<Validated, ValidateError> {
    let document = load_document(path, options.kind)?;
    Ok(validate_table(document, &path.display().to_string(), options))
}

/// Run all four levels over a parsed table.
pub fn validate_table(document: TableDocument, input_path: &str, options: &ValidateOptions) -> Validated {
    let started_at = Utc::now();
    let config = &options.config;
    let mut errors = Vec::new();
    let mut status = ItemStatus::default();
    let mut levels_run = vec![ValidationLevel::CsvWellformedness];

    let mut level1: Vec<ValidationError> = document
        .rows
        .iter()
        .flat_map(|row| wellformed::check_row(row, document.kind, config))
        .collect();
    status.record(&level1);
    let duplicates = wellformed::check_duplicates(&document, |r, f, i| should_skip(r, f, i, Rule::Duplicates, &status));
    status.record(&duplicates);
    level1.extend(duplicates);
    errors.extend(level1);

    levels_run.push(ValidationLevel::ExternalSyntax);
    let level2 = check_syntax(&document, &status);
    status.record(&level2);
    errors.extend(level2);

    if !config.offline {
        levels_run.push(ValidationLevel::Existence);
    }
    errors.extend(check_existence(&document, &status, options));

    levels_run.push(ValidationLevel::Semantics);
    for row in &document.rows {
        errors.extend(semantics::check_row(row, document.kind, config, |r, f, i| {
            should_skip(r, f, i, Rule::Semantics, &status)
        }));
    }

    let mut report = ValidationReport {
        errors,
        input_path: input_path.to_string(),
        table_kind: document.kind,
        started_at,
        finished_at: Utc::now(),
        levels_run,
    };
    report.finalize(&document);
    Validated {
        document,
        report,
        status,
    }
}

/// Identifiers carried by an item, with the label used for their findings.
fn item_ids<'a>(field: &str, item: &'a Item) -> Option<(Vec<(&'a str, &'a str)>, bool)> {
    let agent = match field_shape(field) {
        FieldShape::IdList | FieldShape::VenueList => false,
        FieldShape::AgentList => true,
        FieldShape::Single(_) => return None,
    };
    Some((item.identifiers().collect(), agent))
}

fn each_checked_item<'a>(
    document: &'a TableDocument,
    status: &'a ItemStatus,
    rule: Rule,
) -> impl Iterator<Item = (usize, &'a str, &'a Item, Vec<(&'a str, &'a str)>, bool)> + 'a {
    document.rows.iter().flat_map(move |row| {
        row.cells.iter().flat_map(move |cell| {
            cell.items.iter().filter_map(move |item| {
                if should_skip(row.index, &cell.field_name, item.index, rule, status) {
                    return None;
                }
                let (ids, agent) = item_ids(&cell.field_name, item)?;
                (!ids.is_empty()).then_some((row.index, cell.field_name.as_str(), item, ids, agent))
            })
        })
    })
}

/// Level 2: identifier values against their issuing organisation's rules.
fn check_syntax(document: &TableDocument, status: &ItemStatus) -> Vec<ValidationError> {
    each_checked_item(document, status, Rule::IdSyntax)
        .filter(|(_, _, _, ids, _)| {
            ids.iter().any(|(scheme, value)| {
                !matches!(validate_id_syntax(scheme, value), Ok(()) | Err(IdSyntaxError::UnknownScheme(_)))
            })
        })
        .map(|(row, field, item, _, agent)| {
            let label = if agent { ErrorLabel::RaIdFormat } else { ErrorLabel::BrIdFormat };
            ValidationError::at_item(label, ValidationLevel::ExternalSyntax, row, field, item.index)
        })
        .collect()
}

/// Level 3: registry lookups, one per distinct identifier.
fn check_existence(document: &TableDocument, status: &ItemStatus, options: &ValidateOptions) -> Vec<ValidationError> {
    let candidates: Vec<_> = each_checked_item(document, status, Rule::IdExistence).collect();
    let wanted: BTreeSet<IdKey> = candidates
        .iter()
        .flat_map(|(_, _, _, ids, _)| ids.iter().map(|(s, v)| id_key(s, v)))
        .collect();
    let verdicts = resolve_batch(
        &wanted,
        &options.cache,
        options.resolver.as_ref(),
        &options.config.limits,
        options.config.offline,
    );
    if let Err(e) = options.cache.save() {
        log::warn!("cannot save the lookup cache: {e}");
    }
    candidates
        .into_iter()
        .filter(|(_, _, _, ids, _)| {
            ids.iter()
                .any(|(s, v)| verdicts.get(&id_key(s, v)).is_some_and(|v| v.status == VerdictStatus::NotFound))
        })
        .map(|(row, field, item, _, agent)| {
            let label = if agent { ErrorLabel::RaIdExistence } else { ErrorLabel::BrIdExistence };
            ValidationError::at_item(label, ValidationLevel::Existence, row, field, item.index)
        })
        .collect()
}

/// Both documents of a pair plus the cross-document findings.
pub struct PairReport {
    pub meta: Validated,
    pub cits: Validated,
    pub cross: Vec<CrossError>,
}

pub fn validate_pair(meta_path: &Path, cits_path: &Path, options: &ValidateOptions) -> Result<PairReport, ValidateError> {
    let meta_doc = load_document(meta_path, Some(TableKind::Meta))?;
    let cits_doc = load_document(cits_path, Some(TableKind::Cits))?;
    let meta = validate_table(meta_doc, &meta_path.display().to_string(), options);
    let cits = validate_table(cits_doc, &cits_path.display().to_string(), options);
    let cross = semantics::cross_validate(
        &meta.document,
        &cits.document,
        |r, f, i| should_skip(r, f, i, Rule::Semantics, &meta.status),
        |r, f, i| should_skip(r, f, i, Rule::Semantics, &cits.status),
    );
    Ok(PairReport { meta, cits, cross })
}
