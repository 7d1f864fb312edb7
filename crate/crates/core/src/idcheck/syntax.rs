use super::checksum::{isbn_checksum_ok, issn_checksum_ok, orcid_checksum_ok};
use regex::Regex;
use std::sync::OnceLock;
use thiserror::Error;

/// Kind of entity an identifier may name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdRole {
    BibliographicResource,
    ResponsibleAgent,
    Venue,
}

use IdRole::*;

#[derive(Debug)]
pub struct SchemeSpec {
    pub scheme: &'static str,
    pub pattern: &'static str,
    pub checksum: Option<fn(&str) -> bool>,
    /// Default existence endpoint, `{value}` is replaced by the identifier.
    pub resolver: Option<&'static str>,
    pub applies_to: &'static [IdRole],
}

pub static SCHEMES: &[SchemeSpec] = &[
    SchemeSpec {
        scheme: "doi",
        pattern: r"(?i)^10\.\d{4,9}(?:\.\d+)*/\S+$",
        checksum: None,
        resolver: Some("https://doi.org/api/handles/{value}"),
        applies_to: &[BibliographicResource, Venue],
    },
    SchemeSpec {
        scheme: "pmid",
        pattern: r"^[1-9]\d*$",
        checksum: None,
        resolver: Some("https://pubmed.ncbi.nlm.nih.gov/{value}/"),
        applies_to: &[BibliographicResource],
    },
    SchemeSpec {
        scheme: "pmcid",
        pattern: r"^PMC[1-9]\d*$",
        checksum: None,
        resolver: None,
        applies_to: &[BibliographicResource],
    },
    SchemeSpec {
        scheme: "issn",
        pattern: r"^\d{4}-\d{3}[\dX]$",
        checksum: Some(issn_checksum_ok),
        resolver: None,
        applies_to: &[BibliographicResource, Venue],
    },
    SchemeSpec {
        scheme: "isbn",
        pattern: r"^(?:\d{9}[\dX]|\d{13}|(?:\d+-){3}[\dX]|(?:\d+-){4}\d)$",
        checksum: Some(isbn_checksum_ok),
        resolver: None,
        applies_to: &[BibliographicResource, Venue],
    },
    SchemeSpec {
        scheme: "wikidata",
        pattern: r"^Q[1-9]\d*$",
        checksum: None,
        resolver: None,
        applies_to: &[BibliographicResource, Venue, ResponsibleAgent],
    },
    SchemeSpec {
        scheme: "openalex",
        pattern: r"^[WSAIPCFT][1-9]\d*$",
        checksum: None,
        resolver: None,
        applies_to: &[BibliographicResource, Venue],
    },
    SchemeSpec {
        scheme: "url",
        pattern: r"^(?i:https?)://[^\s/?#]+\.[^\s/?#]+(?:[/?#]\S*)?$",
        checksum: None,
        resolver: None,
        applies_to: &[BibliographicResource, Venue],
    },
    SchemeSpec {
        scheme: "jid",
        pattern: r"^[A-Za-z0-9][A-Za-z0-9._-]*$",
        checksum: None,
        resolver: None,
        applies_to: &[Venue],
    },
    SchemeSpec {
        scheme: "arxiv",
        pattern: r"^(?:\d{4}\.\d{4,5}|[a-z-]+(?:\.[A-Z]{2})?/\d{7})(?:v\d+)?$",
        checksum: None,
        resolver: None,
        applies_to: &[BibliographicResource],
    },
    SchemeSpec {
        scheme: "orcid",
        pattern: r"^\d{4}-\d{4}-\d{4}-\d{3}[\dX]$",
        checksum: Some(orcid_checksum_ok),
        resolver: Some("https://pub.orcid.org/v3.0/{value}"),
        applies_to: &[ResponsibleAgent],
    },
    SchemeSpec {
        scheme: "viaf",
        pattern: r"^[1-9]\d*$",
        checksum: None,
        resolver: None,
        applies_to: &[ResponsibleAgent],
    },
    SchemeSpec {
        scheme: "crossref",
        pattern: r"^[1-9]\d*$",
        checksum: None,
        resolver: None,
        applies_to: &[ResponsibleAgent],
    },
    SchemeSpec {
        scheme: "ror",
        pattern: r"^0[a-hj-km-np-tv-z0-9]{6}\d{2}$",
        checksum: None,
        resolver: None,
        applies_to: &[ResponsibleAgent],
    },
];

pub fn scheme_spec(scheme: &str) -> Option<&'static SchemeSpec> {
    SCHEMES.iter().find(|s| s.scheme == scheme)
}

fn compiled() -> &'static [Regex] {
    static RES: OnceLock<Vec<Regex>> = OnceLock::new();
    RES.get_or_init(|| {
        SCHEMES
            .iter()
            .map(|s| Regex::new(s.pattern).expect("valid scheme pattern"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdSyntaxError {
    #[error("no syntax rules known for scheme '{0}'")]
    UnknownScheme(String),
    #[error("value does not match the {0} pattern")]
    Pattern(&'static str),
    #[error("value fails the {0} check digit")]
    Checksum(&'static str),
}

/// Check a value against the rules of its issuing organisation.
pub fn validate_id_syntax(scheme: &str, value: &str) -> Result<(), IdSyntaxError> {
    let index = SCHEMES
        .iter()
        .position(|s| s.scheme == scheme)
        .ok_or_else(|| IdSyntaxError::UnknownScheme(scheme.to_string()))?;
    let spec = &SCHEMES[index];
    if !compiled()[index].is_match(value) {
        return Err(IdSyntaxError::Pattern(spec.scheme));
    }
    match spec.checksum {
        Some(check) if !check(value) => Err(IdSyntaxError::Checksum(spec.scheme)),
        _ => Ok(()),
    }
}
