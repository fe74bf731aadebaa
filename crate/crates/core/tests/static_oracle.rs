mod common;

use std::time::Instant;

use common::*;
use pyarch_core::model::{model_validate, Provenance};
use pyarch_core::static_analysis::{analyze_project, scan_project, UnresolvedReason};

#[test]
fn scan_matches_hand_listing() {
    let set = scan_project(&fixture_src(), &[], &[]).unwrap();
    let got: Vec<(String, String)> = set
        .files
        .iter()
        .map(|f| (f.module.to_string(), f.path.to_string_lossy().into_owned()))
        .collect();
    assert_eq!(got, module_listing());
    assert!(set.warnings.is_empty());
}

#[test]
fn static_model_equals_oracle() {
    let start = Instant::now();
    let analysis = analyze_project(&fixture_src(), &[], &[]).unwrap();
    let elapsed = start.elapsed();
    let oracle = static_oracle();
    let model = &analysis.model;

    assert!(analysis.report.syntax_errors.is_empty());
    assert_eq!(analysis.report.files_parsed, 12);
    assert!(model_validate(model).is_empty());
    assert_eq!(model.components(), oracle.components());
    assert_eq!(model.operations(), oracle.operations());
    assert_eq!(model.call_edges(), oracle.call_edges());
    assert_eq!(model.dataflow_edges(), oracle.dataflow_edges());
    assert_eq!(*model, oracle);
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
}

#[test]
fn definition_counts_match_hand_count() {
    let analysis = analyze_project(&fixture_src(), &[], &[]).unwrap();
    let classes: usize = analysis.tables.iter().map(|t| t.classes.len()).sum();
    let functions: usize = analysis.tables.iter().map(|t| t.functions.len()).sum();
    assert_eq!((classes, functions), (5, 46));
}

#[test]
fn mystery_call_is_reported_not_guessed() {
    let analysis = analyze_project(&fixture_src(), &[], &[]).unwrap();
    let mystery: Vec<_> = analysis
        .report
        .unresolved
        .iter()
        .filter(|u| u.callee == "obj.mystery")
        .collect();
    assert_eq!(mystery.len(), 1);
    assert_eq!(mystery[0].reason, UnresolvedReason::UnresolvedAttribute);
    assert_eq!(mystery[0].caller.as_str(), "uxmini.analysis.plot.mystery_call");
}

#[test]
fn static_model_is_all_static() {
    let analysis = analyze_project(&fixture_src(), &[], &[]).unwrap();
    let m = &analysis.model;
    assert!(m.components().iter().all(|c| c.provenance == Provenance::Static));
    assert!(m.operations().iter().all(|o| o.provenance == Provenance::Static));
    assert!(m.call_edges().iter().all(|e| e.provenance == Provenance::Static && e.weight == 0));
}
