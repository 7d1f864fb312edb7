//! Seeded synthetic META / CITS corpora with a manifest of injected faults,
//! for tests and benchmarks.
//!
//! Every row starts clean and receives at most one fault. Identifiers of
//! clean content are listed in [`SynthCorpus::registered`]; a resolver that
//! answers "exists" exactly for those makes every clean row finding-free.

use crate::catalog::{ErrorLabel, ValidationLevel};
use crate::idcheck::checksum::mod11_2_check_char;
use crate::table::{CITS_HEADER, META_HEADER};
use crate::wellformed::id_key;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// One injected fault and the item it lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed {
    pub row: usize,
    pub field: &'static str,
    pub item: usize,
    pub label: ErrorLabel,
    pub level: ValidationLevel,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub csv: String,
    pub seeds: Vec<Seed>,
    /// Identifiers a mock registry should report as existing, as
    /// `scheme:value` after [`id_key`] normalisation.
    pub registered: BTreeSet<String>,
}

impl SynthCorpus {
    /// Expected number of findings per label.
    pub fn manifest(&self) -> BTreeMap<ErrorLabel, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.seeds {
            *counts.entry(s.label).or_default() += 1;
        }
        counts
    }
}

/// META labels a corpus can seed.
pub const META_FAULTS: [ErrorLabel; 8] = [
    ErrorLabel::PageFormat,
    ErrorLabel::DuplicateRa,
    ErrorLabel::PeopleItemFormat,
    ErrorLabel::BrIdFormat,
    ErrorLabel::BrIdExistence,
    ErrorLabel::PageInterval,
    ErrorLabel::UppercaseTitle,
    ErrorLabel::RaIdExistence,
];

pub const CITS_FAULTS: [ErrorLabel; 3] = [ErrorLabel::BrIdFormat, ErrorLabel::BrIdExistence, ErrorLabel::SelfCitation];

fn normalized(id: &str) -> String {
    let (scheme, value) = id.split_once(':').expect("scheme:value");
    let (scheme, value) = id_key(scheme, value);
    format!("{scheme}:{value}")
}

/// A valid ORCID derived from `n` (distinct `n` give distinct iDs).
pub fn synthetic_orcid(n: u64) -> String {
    let base = format!("{:015}", 100_000_000_000 + n);
    let check = mod11_2_check_char(&base).expect("digits");
    format!("{}-{}-{}-{}{check}", &base[0..4], &base[4..8], &base[8..12], &base[12..15])
}

/// Fault per row: each label once in random order, then random picks with
/// roughly one clean row in three.
fn plan(rows: usize, labels: &[ErrorLabel], rng: &mut ChaCha8Rng) -> Vec<Option<ErrorLabel>> {
    let mut first: Vec<ErrorLabel> = labels.to_vec();
    first.shuffle(rng);
    let mut out: Vec<Option<ErrorLabel>> = first.into_iter().map(Some).take(rows).collect();
    while out.len() < rows {
        out.push(if rng.gen_bool(1.0 / 3.0) {
            None
        } else {
            labels.choose(rng).copied()
        });
    }
    out.shuffle(rng);
    out
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input")
}

pub fn meta_corpus(rows: usize, seed: u64) -> SynthCorpus {
    use ErrorLabel::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut registered: BTreeSet<String> = ["issn:0378-5955", "crossref:78"].iter().map(|s| normalized(s)).collect();
    let mut seeds = Vec::new();
    let mut records = Vec::with_capacity(rows);
    for (n, fault) in plan(rows, &META_FAULTS, &mut rng).into_iter().enumerate() {
        let doi = format!("doi:10.5555/syn.{n}");
        let orcid = format!("orcid:{}", synthetic_orcid(n as u64));
        registered.insert(normalized(&doi));
        registered.insert(normalized(&orcid));
        let family = format!("Family{n}");
        let mut id = doi.clone();
        let mut title = format!("A study of topic {n}");
        let mut author = format!("{family}, Given [{orcid}]");
        let mut page = format!("{}-{}", 10 + n, 20 + n);
        let mut seed_at = |field, item, label, level| {
            seeds.push(Seed {
                row: n,
                field,
                item,
                label,
                level,
            })
        };
        match fault {
            None => {}
            Some(PageFormat) => {
                page = format!("{}–{}", 10 + n, 20 + n);
                seed_at("page", 0, PageFormat, ValidationLevel::CsvWellformedness);
            }
            Some(DuplicateRa) => {
                author = format!("{family}, Given [{orcid}]; {}, given", family.to_lowercase());
                // the pair is one finding, located in both items
                seed_at("author", 0, DuplicateRa, ValidationLevel::CsvWellformedness);
            }
            Some(PeopleItemFormat) => {
                author = format!("{author}; , Given{n}");
                seed_at("author", 1, PeopleItemFormat, ValidationLevel::CsvWellformedness);
            }
            Some(BrIdFormat) => {
                if rng.gen_bool(0.5) {
                    id = format!("{doi} foo:{n}");
                    seed_at("id", 1, BrIdFormat, ValidationLevel::CsvWellformedness);
                } else {
                    id = format!("{doi} pmid:0{n}");
                    seed_at("id", 1, BrIdFormat, ValidationLevel::ExternalSyntax);
                }
            }
            Some(BrIdExistence) => {
                id = format!("doi:10.5555/missing.{n}");
                seed_at("id", 0, BrIdExistence, ValidationLevel::Existence);
            }
            Some(PageInterval) => {
                page = format!("{}-{}", 20 + n, 10 + n);
                seed_at("page", 0, PageInterval, ValidationLevel::Semantics);
            }
            Some(UppercaseTitle) => {
                title = title.to_uppercase();
                seed_at("title", 0, UppercaseTitle, ValidationLevel::CsvWellformedness);
            }
            Some(RaIdExistence) => {
                let unknown = format!("orcid:{}", synthetic_orcid(1_000_000 + n as u64));
                author = format!("{family}, Given [{unknown}]");
                seed_at("author", 0, RaIdExistence, ValidationLevel::Existence);
            }
            Some(other) => unreachable!("{other} is not a META fault"),
        }
        records.push(vec![
            id,
            title,
            author,
            "2020-01-15".to_string(),
            "Journal of Tests [issn:0378-5955]".to_string(),
            "3".to_string(),
            "2".to_string(),
            page,
            "journal article".to_string(),
            "Test Press [crossref:78]".to_string(),
            String::new(),
        ]);
    }
    SynthCorpus {
        csv: to_csv(&META_HEADER, &records),
        seeds,
        registered,
    }
}

pub fn cits_corpus(rows: usize, seed: u64) -> SynthCorpus {
    use ErrorLabel::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut registered = BTreeSet::new();
    let mut seeds = Vec::new();
    let mut records = Vec::with_capacity(rows);
    for (n, fault) in plan(rows, &CITS_FAULTS, &mut rng).into_iter().enumerate() {
        let mut citing = format!("doi:10.5555/CITING.{n}");
        let mut cited = format!("doi:10.5555/CITED.{n}");
        registered.insert(normalized(&citing));
        registered.insert(normalized(&cited));
        let mut seed_at = |field, item, label, level| {
            seeds.push(Seed {
                row: n,
                field,
                item,
                label,
                level,
            })
        };
        match fault {
            None => {}
            Some(BrIdFormat) => {
                citing = format!("doi10.5555/citing.{n}");
                seed_at("citing_id", 0, BrIdFormat, ValidationLevel::CsvWellformedness);
            }
            Some(BrIdExistence) => {
                cited = format!("doi:10.5555/MISSING.{n}");
                seed_at("cited_id", 0, BrIdExistence, ValidationLevel::Existence);
            }
            Some(SelfCitation) => {
                cited = citing.clone();
                seed_at("citing_id", 0, SelfCitation, ValidationLevel::Semantics);
            }
            Some(other) => unreachable!("{other} is not a CITS fault"),
        }
        records.push(vec![citing, "2021-03".to_string(), cited, "2019".to_string()]);
    }
    SynthCorpus {
        csv: to_csv(&CITS_HEADER, &records),
        seeds,
        registered,
    }
}
