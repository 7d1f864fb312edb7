//! Error labels, their validation level, severity and message.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationLevel {
    CsvWellformedness,
    ExternalSyntax,
    Existence,
    Semantics,
}

impl ValidationLevel {
    pub const ALL: [ValidationLevel; 4] = [
        ValidationLevel::CsvWellformedness,
        ValidationLevel::ExternalSyntax,
        ValidationLevel::Existence,
        ValidationLevel::Semantics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ValidationLevel::CsvWellformedness => "csv_wellformedness",
            ValidationLevel::ExternalSyntax => "external_syntax",
            ValidationLevel::Existence => "existence",
            ValidationLevel::Semantics => "semantics",
        }
    }
}

impl fmt::Display for ValidationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Blocking `error` or non-blocking `warning`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorType {
    Error,
    Warning,
}

impl ErrorType {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::Error => "error",
            ErrorType::Warning => "warning",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorLabel {
    DuplicateBr,
    DuplicateRa,
    PeopleItemFormat,
    BrIdFormat,
    RaIdFormat,
    BrIdExistence,
    RaIdExistence,
    PageFormat,
    PageInterval,
    UppercaseTitle,
    SelfCitation,
    // extensions
    DateFormat,
    TypeVocab,
    RequiredField,
    VenueFormat,
    TypeIdMismatch,
    ContainerWithoutVenue,
    VenueTypeMismatch,
    UnmatchedCitationId,
    DateMismatch,
}

impl ErrorLabel {
    pub const ALL: [ErrorLabel; 20] = [
        ErrorLabel::DuplicateBr,
        ErrorLabel::DuplicateRa,
        ErrorLabel::PeopleItemFormat,
        ErrorLabel::BrIdFormat,
        ErrorLabel::RaIdFormat,
        ErrorLabel::BrIdExistence,
        ErrorLabel::RaIdExistence,
        ErrorLabel::PageFormat,
        ErrorLabel::PageInterval,
        ErrorLabel::UppercaseTitle,
        ErrorLabel::SelfCitation,
        ErrorLabel::DateFormat,
        ErrorLabel::TypeVocab,
        ErrorLabel::RequiredField,
        ErrorLabel::VenueFormat,
        ErrorLabel::TypeIdMismatch,
        ErrorLabel::ContainerWithoutVenue,
        ErrorLabel::VenueTypeMismatch,
        ErrorLabel::UnmatchedCitationId,
        ErrorLabel::DateMismatch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorLabel::DuplicateBr => "duplicate_br",
            ErrorLabel::DuplicateRa => "duplicate_ra",
            ErrorLabel::PeopleItemFormat => "people_item_format",
            ErrorLabel::BrIdFormat => "br_id_format",
            ErrorLabel::RaIdFormat => "ra_id_format",
            ErrorLabel::BrIdExistence => "br_id_existence",
            ErrorLabel::RaIdExistence => "ra_id_existence",
            ErrorLabel::PageFormat => "page_format",
            ErrorLabel::PageInterval => "page_interval",
            ErrorLabel::UppercaseTitle => "uppercase_title",
            ErrorLabel::SelfCitation => "self_citation",
            ErrorLabel::DateFormat => "date_format",
            ErrorLabel::TypeVocab => "type_vocab",
            ErrorLabel::RequiredField => "required_field",
            ErrorLabel::VenueFormat => "venue_format",
            ErrorLabel::TypeIdMismatch => "type_id_mismatch",
            ErrorLabel::ContainerWithoutVenue => "container_without_venue",
            ErrorLabel::VenueTypeMismatch => "venue_type_mismatch",
            ErrorLabel::UnmatchedCitationId => "unmatched_citation_id",
            ErrorLabel::DateMismatch => "date_mismatch",
        }
    }

    pub fn severity(self) -> ErrorType {
        use ErrorLabel::*;
        match self {
            BrIdExistence | RaIdExistence | PageInterval | UppercaseTitle | SelfCitation
            | VenueTypeMismatch | UnmatchedCitationId | DateMismatch => ErrorType::Warning,
            _ => ErrorType::Error,
        }
    }

    /// Labels that are not part of the original validator catalog.
    pub fn is_extension(self) -> bool {
        use ErrorLabel::*;
        matches!(
            self,
            DateFormat
                | TypeVocab
                | RequiredField
                | VenueFormat
                | TypeIdMismatch
                | ContainerWithoutVenue
                | VenueTypeMismatch
                | UnmatchedCitationId
                | DateMismatch
        )
    }
}

impl fmt::Display for ErrorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub label: ErrorLabel,
    pub level: ValidationLevel,
    pub message: &'static str,
}

impl CatalogEntry {
    pub fn severity(&self) -> ErrorType {
        self.label.severity()
    }
}

use ErrorLabel as L;
use ValidationLevel as V;

const fn entry(label: ErrorLabel, level: ValidationLevel, message: &'static str) -> CatalogEntry {
    CatalogEntry {
        label,
        level,
        message,
    }
}

/// Every (label, level) pair the validator can emit.
pub static CATALOG: &[CatalogEntry] = &[
    entry(
        L::DuplicateBr,
        V::CsvWellformedness,
        "Several rows share at least one identifier, so they describe the same bibliographic resource. Merge the rows involved into one, or delete the redundant ones.",
    ),
    entry(
        L::DuplicateRa,
        V::CsvWellformedness,
        "This cell lists the same responsible agent (author, editor or publisher) more than once. Keep a single occurrence.",
    ),
    entry(
        L::PeopleItemFormat,
        V::CsvWellformedness,
        "This responsible agent is not well-formed. Write the name of the person ('Family, Given') or organisation, optionally followed by one space and a bracketed, space-separated list of identifiers, e.g. 'Doe, Jane [orcid:0000-0002-1825-0097]'.",
    ),
    entry(
        L::BrIdFormat,
        V::CsvWellformedness,
        "This identifier does not follow the table syntax. Identifiers of bibliographic resources are written as 'scheme:value' with a supported scheme and separated by a single space.",
    ),
    entry(
        L::BrIdFormat,
        V::ExternalSyntax,
        "This identifier value does not respect the syntax defined by the organisation issuing the scheme (pattern or check digit).",
    ),
    entry(
        L::RaIdFormat,
        V::CsvWellformedness,
        "This identifier of a responsible agent does not follow the table syntax. Write it as 'scheme:value' using a scheme supported for people and organisations.",
    ),
    entry(
        L::RaIdFormat,
        V::ExternalSyntax,
        "This identifier value of a responsible agent does not respect the syntax defined by the organisation issuing the scheme (pattern or check digit).",
    ),
    entry(
        L::BrIdExistence,
        V::Existence,
        "The registry of this scheme has no record of the identifier, so it does not identify any registered bibliographic resource.",
    ),
    entry(
        L::RaIdExistence,
        V::Existence,
        "The registry of this scheme has no record of the identifier, so it does not identify any registered person or organisation.",
    ),
    entry(
        L::PageFormat,
        V::CsvWellformedness,
        "The page value is not well-formed. Write the first page, a hyphen and the last page, e.g. '12-20' (use '12-12' for a single page).",
    ),
    entry(
        L::PageInterval,
        V::Semantics,
        "The page range cannot be right: its first page is greater than its last page.",
    ),
    entry(
        L::UppercaseTitle,
        V::CsvWellformedness,
        "The title is written entirely in capital letters. Check it against the published title of the work.",
    ),
    entry(
        L::SelfCitation,
        V::Semantics,
        "The citing and the cited resource share an identifier: the resource would be citing itself.",
    ),
    entry(
        L::DateFormat,
        V::CsvWellformedness,
        "The date is not well-formed. Use YYYY, YYYY-MM or YYYY-MM-DD with an existing calendar date.",
    ),
    entry(
        L::TypeVocab,
        V::CsvWellformedness,
        "The publication type is not in the list of supported types.",
    ),
    entry(
        L::RequiredField,
        V::CsvWellformedness,
        "A required value is missing: a row needs at least an identifier or a title, and a citation needs both a citing and a cited identifier.",
    ),
    entry(
        L::VenueFormat,
        V::CsvWellformedness,
        "The venue is not well-formed. Write its name, optionally followed by one space and a bracketed, space-separated list of identifiers.",
    ),
    entry(
        L::TypeIdMismatch,
        V::Semantics,
        "The identifier scheme is not compatible with the publication type of this row.",
    ),
    entry(
        L::ContainerWithoutVenue,
        V::Semantics,
        "A volume or issue is given but the venue containing it is missing.",
    ),
    entry(
        L::VenueTypeMismatch,
        V::Semantics,
        "A venue is given for a publication type that is not normally published inside a venue.",
    ),
    entry(
        L::UnmatchedCitationId,
        V::Semantics,
        "This identifier of a citing or cited resource does not appear in any row of the accompanying metadata table.",
    ),
    entry(
        L::DateMismatch,
        V::Semantics,
        "The publication date in the citation table disagrees with the one of the same resource in the metadata table.",
    ),
];

pub fn lookup(label: ErrorLabel, level: ValidationLevel) -> Option<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.label == label && e.level == level)
}

/// Message for a label, preferring the entry of `level`.
pub fn message(label: ErrorLabel, level: ValidationLevel) -> &'static str {
    lookup(label, level)
        .or_else(|| CATALOG.iter().find(|e| e.label == label))
        .map(|e| e.message)
        .unwrap_or("")
}
