//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod gen;
pub mod graphs;
pub mod trees;

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyarch_core::model::{
    ArchitectureModel, CallEdge, Component, ComponentKind, DataflowEdge, DataflowKind, Operation, Provenance,
};
use pyarch_core::QualifiedName;

/// Also reached from other crates' tests, hence the detour through `../core`.
pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/uxmini")
        .canonicalize()
        .expect("fixture directory")
}

pub fn fixture_src() -> PathBuf {
    fixture_dir().join("src")
}

pub fn fixture_trace() -> PathBuf {
    fixture_dir().join("uxmini.trace")
}

pub fn qn(text: &str) -> QualifiedName {
    QualifiedName::parse(text).unwrap()
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Sections of a `[name]`-headed, whitespace-separated oracle file.
pub fn oracle_sections(text: &str) -> BTreeMap<String, Vec<Vec<String>>> {
    let mut out: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut current = String::new();
    for line in data_lines(text) {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.to_string();
            out.entry(current.clone()).or_default();
            continue;
        }
        out.entry(current.clone())
            .or_default()
            .push(line.split_whitespace().map(str::to_string).collect());
    }
    out
}

/// The hand-built static model of the fixture.
pub fn static_oracle() -> ArchitectureModel {
    let text = std::fs::read_to_string(fixture_dir().join("oracle_static.txt")).unwrap();
    let sections = oracle_sections(&text);
    let st = Provenance::Static;
    let components = sections["components"]
        .iter()
        .map(|r| {
            let parent = (r[2] != "-").then(|| qn(&r[2]));
            Component::new(qn(&r[1]), ComponentKind::parse(&r[0]).unwrap(), parent, st)
        })
        .collect();
    let operations = sections["operations"]
        .iter()
        .map(|r| Operation::new(qn(&r[0]), qn(&r[1]), r[2].parse().unwrap(), st))
        .collect();
    let calls = sections["calls"]
        .iter()
        .map(|r| CallEdge::new(qn(&r[0]), qn(&r[1]), 0, st))
        .collect();
    let flows = sections["dataflow"]
        .iter()
        .map(|r| DataflowEdge::new(qn(&r[0]), qn(&r[1]), DataflowKind::parse(&r[2]).unwrap()))
        .collect();
    ArchitectureModel::from_parts("static:src", components, operations, calls, flows)
}

/// `(module, relative path)` rows of the hand module listing.
pub fn module_listing() -> Vec<(String, String)> {
    let text = std::fs::read_to_string(fixture_dir().join("modules.txt")).unwrap();
    data_lines(&text)
        .map(|l| {
            let (m, p) = l.split_once('\t').unwrap();
            (m.to_string(), p.to_string())
        })
        .collect()
}

/// Hand caller/callee counts of the fixture trace; `None` caller marks a root.
pub fn expected_trace_calls() -> BTreeMap<(Option<String>, String), u64> {
    let text = std::fs::read_to_string(fixture_dir().join("uxmini.calls.expected")).unwrap();
    data_lines(&text)
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            let caller = (f[0] != "-").then(|| f[0].to_string());
            ((caller, f[1].to_string()), f[2].parse().unwrap())
        })
        .collect()
}

pub fn fixture_static() -> ArchitectureModel {
    pyarch_core::static_analysis::analyze_project(&fixture_src(), &[], &[])
        .unwrap()
        .model
}

pub fn fixture_dynamic() -> ArchitectureModel {
    use pyarch_core::trace::{build_dynamic_model, parse_trace_log, reconstruct_traces};
    let log = parse_trace_log(&fixture_trace()).unwrap();
    build_dynamic_model(&reconstruct_traces(log.events), "dynamic:uxmini.trace")
}

pub fn fixture_merged() -> ArchitectureModel {
    pyarch_core::merge::merge_models(&fixture_static(), &fixture_dynamic()).unwrap()
}

pub fn golden_dir() -> PathBuf {
    fixture_dir().join("golden")
}

/// Compares `actual` with a frozen golden file. With `UPDATE_GOLDEN=1` the
/// file is rewritten instead, for deliberate re-freezing after review.
pub fn assert_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("golden {} unreadable ({e}); run with UPDATE_GOLDEN=1 to create", path.display()));
    if expected != actual {
        let line = expected
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| expected.lines().count().min(actual.lines().count()));
        panic!("{} differs from golden at line {}", name, line + 1);
    }
}
