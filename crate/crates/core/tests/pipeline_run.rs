mod common;

use std::path::{Path, PathBuf};

use pyarch_core::export::{check_graphml, from_json, ExportFormat};
use pyarch_core::layout::read_dot;
use pyarch_core::pipeline::{
    run_pipeline, ExitStatus, ModelSource, PipelineConfig, Stage, StageStatus, DYNAMIC_MODEL_FILE, MERGED_MODEL_FILE,
    REPORT_FILE, STATIC_MODEL_FILE, SVG_FILE, TIMING_FILE,
};

use common::{fixture_src, fixture_trace};

fn config(out: &Path, root: Option<PathBuf>, logs: Vec<PathBuf>) -> PipelineConfig {
    PipelineConfig {
        project_root: root,
        trace_logs: logs,
        out_dir: out.to_path_buf(),
        ..PipelineConfig::default()
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The fixture trace plus one trace whose signature names a module as if it
/// were a function, so the merged model would be invalid.
fn clashing_trace(dir: &Path) -> PathBuf {
    let mut text = std::fs::read_to_string(fixture_trace()).unwrap();
    text.push_str("900;0;0;uxmini.util;10;20;4242@fixture-host\n");
    let path = dir.join("clash.trace");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn fixture_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&config(dir.path(), Some(fixture_src()), vec![fixture_trace()])).unwrap();
    assert_eq!(out.exit, ExitStatus::Success, "{:?}", out.diagnostics());
    assert_eq!(out.exported, Some(ModelSource::Merged));

    for name in [STATIC_MODEL_FILE, DYNAMIC_MODEL_FILE, MERGED_MODEL_FILE, "model.dot", SVG_FILE, TIMING_FILE] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let merged = from_json(&read(dir.path(), MERGED_MODEL_FILE)).unwrap();
    assert_eq!(merged, common::fixture_merged());
    read_dot(&read(dir.path(), "model.dot")).unwrap();

    let timing: serde_json::Value = serde_json::from_str(&read(dir.path(), TIMING_FILE)).unwrap();
    let keys: Vec<&str> = timing.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["export", "ingest", "layout", "merge", "static", "total"]);
    let mut sum = 0.0;
    for stage in Stage::ALL {
        let s = timing[stage.as_str()]["seconds"].as_f64().unwrap();
        assert!(s >= 0.0);
        assert_eq!(timing[stage.as_str()]["status"], "ok");
        sum += s;
    }
    let total = timing["total"]["seconds"].as_f64().unwrap();
    assert!(total >= sum && total - sum < 0.5, "total {total} vs stages {sum}");
    assert_eq!(timing["merge"]["counts"]["operations"], merged.operations().len());
}

#[test]
fn trace_only_run_skips_static() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&config(dir.path(), None, vec![fixture_trace()])).unwrap();
    assert_eq!(out.exit, ExitStatus::Success);
    assert_eq!(out.exported, Some(ModelSource::Dynamic));
    assert!(matches!(out.timing.stage(Stage::Static).status, StageStatus::Skipped { .. }));
    assert!(matches!(out.timing.stage(Stage::Merge).status, StageStatus::Skipped { .. }));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), REPORT_FILE)).unwrap();
    assert_eq!(report["stages"]["static"]["status"], "skipped");
    assert!(!dir.path().join(STATIC_MODEL_FILE).exists());
    assert!(dir.path().join(SVG_FILE).is_file());
}

#[test]
fn merge_failure_falls_back_to_static_model() {
    let dir = tempfile::tempdir().unwrap();
    let log = clashing_trace(dir.path());
    let out_dir = dir.path().join("out");
    let out = run_pipeline(&config(&out_dir, Some(fixture_src()), vec![log])).unwrap();
    assert_eq!(out.exit, ExitStatus::Partial);
    assert_eq!(out.exit.code(), 3);
    assert_eq!(out.exported, Some(ModelSource::Static));
    let diags = out.diagnostics();
    assert_eq!(diags.len(), 1);
    assert!(diags[0].starts_with("merge stage failed"), "{diags:?}");
    assert!(!out_dir.join(MERGED_MODEL_FILE).exists());

    let g = read_dot(&read(&out_dir, "model.dot")).unwrap();
    let fixture = pyarch_core::layout::build_grouped_graph(&common::fixture_static(), true);
    assert_eq!(g, fixture);
    assert!(read(&out_dir, SVG_FILE).starts_with("<svg"));
}

#[test]
fn failed_root_without_traces_is_a_stage_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&config(dir.path(), Some(dir.path().join("missing")), vec![])).unwrap();
    assert_eq!(out.exit, ExitStatus::StageFailure);
    assert!(matches!(out.timing.stage(Stage::Export).status, StageStatus::Skipped { .. }));
    assert!(out.diagnostics()[0].starts_with("static stage failed"));
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_pipeline(&config(dir.path(), None, vec![])).unwrap_err();
    assert_eq!(err.exit_status(), ExitStatus::UsageError);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&dir.path().join("a"), Some(fixture_src()), vec![fixture_trace()]);
    cfg.export.format = ExportFormat::Graphml;
    cfg.layout.rng_seed = 11;
    run_pipeline(&cfg).unwrap();
    cfg.out_dir = dir.path().join("b");
    run_pipeline(&cfg).unwrap();
    // Re-running into a used directory must not leave stale files behind either.
    run_pipeline(&cfg).unwrap();

    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != TIMING_FILE)
        .collect();
    names.sort();
    assert!(names.contains(&"model.graphml".to_string()), "{names:?}");
    for name in &names {
        assert_eq!(read(&dir.path().join("a"), name), read(&dir.path().join("b"), name), "{name} differs");
    }
    check_graphml(&read(&dir.path().join("b"), "model.graphml")).unwrap();
}
