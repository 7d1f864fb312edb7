//! `biblioguard` command-line tool.
//!
//! Exit status: `0` clean (warnings allowed unless `--strict-warnings`),
//! `1` validation errors found or a monitor test failed, `2` usage, IO or
//! configuration failure.

use anyhow::{Context, Result};
use biblioguard_core::monitor::{self, emit_monitor_html, emit_monitor_json, Collection, MonitorConfig};
use biblioguard_core::report::{emit_cross_json, emit_metadata, parse_errors_json};
use biblioguard_core::{
    emit_html, emit_json, emit_txt_summary, parse_table, validate_document, validate_pair, ErrorType, RuleConfig,
    TableKind, ValidateOptions, Validated, VIEWER_STUB,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const CLEAN: u8 = 0;
const FINDINGS: u8 = 1;
const FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "biblioguard", version, about = "Validate bibliographic CSV tables and monitor SPARQL collections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate one META or CITS table.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TypeArg::Auto)]
        r#type: TypeArg,
        #[command(flatten)]
        common: Common,
    },
    /// Validate a META table and a CITS table together, including cross checks.
    ValidatePair {
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        cits: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the SPARQL quality tests of a monitor configuration.
    Monitor {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also run count-mode tests.
        #[arg(long)]
        count: bool,
    },
    /// Rebuild the HTML report from a stored JSON report and its source table.
    Render {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    out_dir: PathBuf,
    /// Skip registry lookups.
    #[arg(long)]
    offline: bool,
    #[arg(long)]
    no_html: bool,
    /// Treat warnings as failures for the exit status.
    #[arg(long)]
    strict_warnings: bool,
    /// Rule configuration file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write run metadata (timestamps, levels run, counts).
    #[arg(long)]
    metadata: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    Auto,
    Meta,
    Cits,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { input, r#type, common } => cmd_validate(&input, r#type, &common),
        Command::ValidatePair { meta, cits, common } => cmd_validate_pair(&meta, &cits, &common),
        Command::Monitor { config, out_dir, count } => cmd_monitor(&config, &out_dir, count),
        Command::Render { report, source, out } => cmd_render(&report, &source, &out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(FAILURE)
        }
    }
}

fn options(common: &Common, kind: Option<TableKind>) -> Result<ValidateOptions> {
    let mut config = match &common.config {
        Some(path) => RuleConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => RuleConfig::default(),
    };
    config.apply_env();
    config.offline |= common.offline;
    let mut options = ValidateOptions::from_config(config)?;
    options.kind = kind;
    Ok(options)
}

fn write_with(path: &Path, emit: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    emit(&mut out)?;
    out.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_reports(run: &Validated, out_dir: &Path, common: &Common) -> Result<()> {
    let prefix = run.report.table_kind.as_str();
    write_with(&out_dir.join(format!("{prefix}_errors.json")), |w| Ok(emit_json(&run.report, w)?))?;
    write_with(&out_dir.join(format!("{prefix}_summary.txt")), |w| Ok(emit_txt_summary(&run.report, w)?))?;
    if !common.no_html {
        let path = out_dir.join(format!("{prefix}_report.html"));
        write_with(&path, |w| Ok(emit_html(&run.report.errors, &run.document, VIEWER_STUB, w)?))?;
    }
    if common.metadata {
        write_with(&out_dir.join(format!("{prefix}_metadata.json")), |w| Ok(emit_metadata(&run.report, w)?))?;
    }
    Ok(())
}

fn status(errors: usize, warnings: usize, strict: bool) -> u8 {
    if errors > 0 || (strict && warnings > 0) {
        FINDINGS
    } else {
        CLEAN
    }
}

fn cmd_validate(input: &Path, kind: TypeArg, common: &Common) -> Result<u8> {
    let kind = match kind {
        TypeArg::Auto => None,
        TypeArg::Meta => Some(TableKind::Meta),
        TypeArg::Cits => Some(TableKind::Cits),
    };
    let options = options(common, kind)?;
    let run = validate_document(input, &options)?;
    fs::create_dir_all(&common.out_dir).with_context(|| format!("creating {}", common.out_dir.display()))?;
    write_reports(&run, &common.out_dir, common)?;
    let (errors, warnings) = (run.report.error_count(), run.report.warning_count());
    println!(
        "{}: {} {errors} error(s), {warnings} warning(s); reports in {}",
        input.display(),
        run.report.table_kind.as_str().to_uppercase(),
        common.out_dir.display()
    );
    Ok(status(errors, warnings, common.strict_warnings))
}

fn cmd_validate_pair(meta: &Path, cits: &Path, common: &Common) -> Result<u8> {
    let options = options(common, None)?;
    let pair = validate_pair(meta, cits, &options)?;
    fs::create_dir_all(&common.out_dir).with_context(|| format!("creating {}", common.out_dir.display()))?;
    write_reports(&pair.meta, &common.out_dir, common)?;
    write_reports(&pair.cits, &common.out_dir, common)?;
    write_with(&common.out_dir.join("cross_errors.json"), |w| Ok(emit_cross_json(&pair.cross, w)?))?;

    let cross_errors = pair.cross.iter().filter(|e| e.error_type == ErrorType::Error).count();
    let errors = pair.meta.report.error_count() + pair.cits.report.error_count() + cross_errors;
    let warnings = pair.meta.report.warning_count() + pair.cits.report.warning_count() + pair.cross.len() - cross_errors;
    println!(
        "META {} error(s), {} warning(s); CITS {} error(s), {} warning(s); {} cross finding(s); reports in {}",
        pair.meta.report.error_count(),
        pair.meta.report.warning_count(),
        pair.cits.report.error_count(),
        pair.cits.report.warning_count(),
        pair.cross.len(),
        common.out_dir.display()
    );
    Ok(status(errors, warnings, common.strict_warnings))
}

fn cmd_monitor(config_path: &Path, out_dir: &Path, count: bool) -> Result<u8> {
    let mut config = MonitorConfig::load(config_path)?;
    config.apply_env();
    let shown = config_path.display().to_string();
    let report = if count {
        monitor::run_all(&config, &shown)?
    } else {
        monitor::run_tests(&config, &shown)?
    };
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let stem = match report.collection {
        Collection::Meta => "meta_monitor",
        Collection::Index => "index_monitor",
    };
    write_with(&out_dir.join(format!("{stem}.json")), |w| Ok(emit_monitor_json(&report, w)?))?;
    write_with(&out_dir.join(format!("{stem}.html")), |w| Ok(emit_monitor_html(&report, w)?))?;

    let failed = report.failed();
    let undecided = report.indeterminate();
    println!(
        "{} test(s) against {}: {} passed, {failed} failed, {undecided} not determined ({:.1} s)",
        report.results.len(),
        report.endpoint_url,
        report.results.len() - failed - undecided,
        report.total_running_time
    );
    if undecided > 0 {
        eprintln!("notice: {undecided} test(s) could not be run; their outcome is unknown, not a pass or a failure");
    }
    Ok(if failed > 0 { FINDINGS } else { CLEAN })
}

fn cmd_render(report: &Path, source: &Path, out: &Path) -> Result<u8> {
    let bytes = fs::read(report).with_context(|| format!("reading {}", report.display()))?;
    let errors = parse_errors_json(&bytes).with_context(|| format!("{} is not a findings list", report.display()))?;
    let csv = fs::read(source).with_context(|| format!("reading {}", source.display()))?;
    let document = parse_table(&csv).with_context(|| format!("parsing {}", source.display()))?;
    let mut page = Vec::new();
    emit_html(&errors, &document, VIEWER_STUB, &mut page)
        .with_context(|| format!("{} does not match {}", report.display(), source.display()))?;
    fs::write(out, page).with_context(|| format!("writing {}", out.display()))?;
    println!("{} finding(s) rendered to {}", errors.len(), out.display());
    Ok(CLEAN)
}
