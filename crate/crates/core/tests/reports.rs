use biblioguard_core::report::{check_positions, parse_errors_json};
use biblioguard_core::synth::{cits_corpus, meta_corpus, SynthCorpus};
use biblioguard_core::{emit_json, parse_table, validate_table, RuleConfig, ValidateOptions};

fn offline_run(corpus: &SynthCorpus) -> biblioguard_core::Validated {
    let mut config = RuleConfig::default();
    config.offline = true;
    let options = ValidateOptions::from_config(config).unwrap();
    validate_table(parse_table(corpus.csv.as_bytes()).unwrap(), "synthetic.csv", &options)
}

#[test]
fn positions_resolve_and_json_round_trips() {
    for seed in 0..5 {
        for corpus in [meta_corpus(150, seed), cits_corpus(150, seed)] {
            let run = offline_run(&corpus);
            assert!(!run.report.errors.is_empty());
            check_positions(&run.report.errors, &run.document).unwrap();

            let mut bytes = Vec::new();
            emit_json(&run.report, &mut bytes).unwrap();
            let back = parse_errors_json(&bytes).unwrap();
            assert_eq!(back, run.report.errors);
            let mut again = Vec::new();
            let mut report = run.report.clone();
            report.errors = back;
            emit_json(&report, &mut again).unwrap();
            assert_eq!(again, bytes);
        }
    }
}

#[test]
fn offline_runs_report_no_existence_findings() {
    let run = offline_run(&meta_corpus(100, 9));
    assert!(run.report.errors.iter().all(|e| e.validation_level.as_str() != "existence"));
    assert!(!run.report.levels_run.iter().any(|l| l.as_str() == "existence"));
}
