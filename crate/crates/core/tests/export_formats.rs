mod common;

use common::*;
use proptest::prelude::*;
use pyarch_core::export::{check_graphml, from_json, to_dot, to_graphml, to_json, DotMode, ExportOptions};
use pyarch_core::layout::{build_grouped_graph, read_dot};
use pyarch_core::model::ArchitectureModel;
use pyarch_core::static_analysis::export_entity_csv;

fn grouped() -> ExportOptions {
    ExportOptions {
        dot_mode: DotMode::Grouped,
        include_dataflow: true,
        include_weights: true,
        ..ExportOptions::default()
    }
}

/// Longest parent chain among the model's components, counted from the model.
fn hierarchy_depth(m: &ArchitectureModel) -> usize {
    m.components()
        .iter()
        .map(|c| {
            let mut depth = 1;
            let mut cur = c.parent.clone();
            while let Some(p) = cur {
                depth += 1;
                cur = m.component(&p).unwrap().parent.clone();
            }
            depth
        })
        .max()
        .unwrap_or(0)
}

/// Deepest `subgraph` nesting in DOT text, by counting opened blocks.
fn cluster_nesting(dot: &str) -> usize {
    let (mut depth, mut max) = (0i64, 0i64);
    for line in dot.lines().map(str::trim) {
        if line.starts_with("subgraph") {
            depth += 1;
            max = max.max(depth);
        } else if line == "}" {
            depth -= 1;
        }
    }
    max as usize
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn grouped_dot_parses_back_to_the_grouped_graph(m in gen::model()) {
        let text = to_dot(&m, &grouped());
        let parsed = read_dot(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed, build_grouped_graph(&m, true));
    }

    #[test]
    fn flat_dot_is_grammatical(m in gen::model()) {
        let opts = ExportOptions { dot_mode: DotMode::Flat, ..grouped() };
        let parsed = read_dot(&to_dot(&m, &opts)).unwrap();
        prop_assert_eq!(parsed.leaves().len(), m.components().len() + m.operations().len());
        prop_assert_eq!(parsed.group_count(), 0);
    }

    #[test]
    fn cluster_nesting_follows_package_depth(m in gen::model()) {
        let text = to_dot(&m, &grouped());
        prop_assert_eq!(cluster_nesting(&text), hierarchy_depth(&m));
        prop_assert_eq!(read_dot(&text).unwrap().depth(), hierarchy_depth(&m));
    }

    #[test]
    fn json_round_trip_is_identity(m in gen::model()) {
        let text = to_json(&m);
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(to_json(&back), text);
    }

    #[test]
    fn graphml_is_valid_for_random_models(m in gen::model()) {
        let summary = check_graphml(&to_graphml(&m)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(summary.nodes, m.components().len() + m.operations().len());
        prop_assert_eq!(summary.edges, m.call_edges().len() + m.dataflow_edges().len());
        prop_assert_eq!(summary.max_depth, hierarchy_depth(&m) + 1);
    }
}

#[test]
fn static_csv_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let files = export_entity_csv(&fixture_static(), dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    for f in files {
        let name = f.file_name().unwrap().to_str().unwrap().to_string();
        assert_golden(&name, &std::fs::read_to_string(&f).unwrap());
    }
}

#[test]
fn dynamic_and_merged_json_match_golden() {
    assert_golden("dynamic.json", &to_json(&fixture_dynamic()));
    assert_golden("merged.json", &to_json(&fixture_merged()));
    let m = fixture_merged();
    assert_eq!(from_json(&to_json(&m)).unwrap(), m);
}

#[test]
fn merged_grouped_dot_matches_golden_and_reparses() {
    let m = fixture_merged();
    let text = to_dot(&m, &grouped());
    assert_golden("merged.dot", &text);
    let golden = std::fs::read_to_string(golden_dir().join("merged.dot")).unwrap();
    assert_eq!(read_dot(&golden).unwrap(), build_grouped_graph(&m, true));
}

#[test]
fn merged_graphml_validates_with_full_counts() {
    let m = fixture_merged();
    let text = to_graphml(&m);
    assert_golden("merged.graphml", &text);
    let summary = check_graphml(&text).unwrap();
    assert_eq!(summary.nodes, m.operations().len() + m.components().len());
    assert_eq!(summary.compound_nodes, m.components().len());
}
