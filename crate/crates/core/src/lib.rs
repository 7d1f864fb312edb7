//! Validation of META-CSV and CITS-CSV bibliographic tables in four levels
//! (wellformedness, identifier syntax, identifier existence, semantics), and
//! SPARQL-based quality monitoring of published collections.
//!
//! ```no_run
//! use biblioguard_core::{validate_document, RuleConfig, ValidateOptions};
//!
//! let options = ValidateOptions::from_config(RuleConfig::default())?;
//! let run = validate_document("meta.csv".as_ref(), &options)?;
//! println!("{} errors, {} warnings", run.report.error_count(), run.report.warning_count());
//! # Ok::<(), biblioguard_core::ValidateError>(())
//! ```

pub mod catalog;
pub mod config;
pub mod idcheck;
pub mod monitor;
pub mod report;
pub mod semantics;
pub mod synth;
pub mod table;
pub mod validate;
pub mod wellformed;

pub use catalog::{ErrorLabel, ErrorType, ValidationLevel};
pub use config::{ConfigError, RuleConfig};
pub use idcheck::{HttpResolver, LookupCache, RegistryVerdict, Resolver, VerdictStatus};
pub use report::{
    emit_html, emit_json, emit_txt_summary, CrossError, LocatedIn, Position, PositionTable, ValidationError,
    ValidationReport, VIEWER_STUB,
};
pub use table::{parse_table, TableDocument, TableError, TableKind};
pub use validate::{
    should_skip, validate_document, validate_pair, validate_table, ItemStatus, PairReport, Rule, ValidateError,
    ValidateOptions, Validated,
};
