//! Name reconciliation, merging and comparison of architecture models.

mod normalize;
mod rules;

use std::collections::BTreeSet;

use serde::Serialize;

pub use normalize::{normalize_names, Collision, NormalizeReport};
pub use rules::{NameRule, NameRuleSet, RuleError};

use crate::model::{ArchitectureModel, DataflowEdge, ModelBuilder, QualifiedName, ValidationReport, WeightRule};

#[derive(Debug, Clone, thiserror::Error)]
pub enum MergeError {
    #[error("{side} model is invalid: {report}")]
    InvalidInput { side: &'static str, report: ValidationReport },
    #[error("merged model is invalid: {0}")]
    InvalidResult(ValidationReport),
    #[error("renaming broke {element}: {detail}")]
    BrokenClosure { element: String, detail: String },
}

/// Label of a merged model.
pub fn merged_label(a: &str, b: &str) -> String {
    format!("{a} + {b}")
}

/// Union of two models keyed by canonical name.
///
/// Provenances of shared elements are united, so a static and a dynamic record
/// of the same element become `both`. Shared call edges keep the larger weight,
/// which lets an observed count replace the static 0.
pub fn merge_models(a: &ArchitectureModel, b: &ArchitectureModel) -> Result<ArchitectureModel, MergeError> {
    ValidationReport::check(a).map_err(|report| MergeError::InvalidInput { side: "first", report })?;
    ValidationReport::check(b).map_err(|report| MergeError::InvalidInput { side: "second", report })?;

    let mut builder = ModelBuilder::new(merged_label(a.label(), b.label()));
    for m in [a, b] {
        for c in m.components() {
            builder.add_component(c.clone());
        }
        for o in m.operations() {
            builder.add_operation(o.clone());
        }
        for e in m.call_edges() {
            builder.add_call(e.clone(), WeightRule::Max);
        }
        for d in m.dataflow_edges() {
            builder.add_dataflow(d.clone());
        }
    }
    let out = builder.build();
    ValidationReport::check(&out).map_err(MergeError::InvalidResult)?;
    Ok(out)
}

/// Element identities of one side of a comparison.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ElementSet {
    pub components: Vec<QualifiedName>,
    pub operations: Vec<QualifiedName>,
    pub call_edges: Vec<(QualifiedName, QualifiedName)>,
    pub dataflow_edges: Vec<DataflowEdge>,
}

impl ElementSet {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
            && self.operations.is_empty()
            && self.call_edges.is_empty()
            && self.dataflow_edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len() + self.operations.len() + self.call_edges.len() + self.dataflow_edges.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ModelDiff {
    pub only_in_a: ElementSet,
    pub only_in_b: ElementSet,
    pub in_both: ElementSet,
}

fn split<T: Ord + Clone>(a: BTreeSet<T>, b: BTreeSet<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
    (
        a.difference(&b).cloned().collect(),
        b.difference(&a).cloned().collect(),
        a.intersection(&b).cloned().collect(),
    )
}

/// Partitions the elements of both models by identity.
pub fn compare_models(a: &ArchitectureModel, b: &ArchitectureModel) -> Result<ModelDiff, MergeError> {
    ValidationReport::check(a).map_err(|report| MergeError::InvalidInput { side: "first", report })?;
    ValidationReport::check(b).map_err(|report| MergeError::InvalidInput { side: "second", report })?;

    let comps = |m: &ArchitectureModel| m.components().iter().map(|c| c.name.clone()).collect::<BTreeSet<_>>();
    let ops = |m: &ArchitectureModel| m.operations().iter().map(|o| o.signature.clone()).collect::<BTreeSet<_>>();
    let calls = |m: &ArchitectureModel| {
        m.call_edges()
            .iter()
            .map(|e| (e.caller.clone(), e.callee.clone()))
            .collect::<BTreeSet<_>>()
    };
    let flows = |m: &ArchitectureModel| m.dataflow_edges().iter().cloned().collect::<BTreeSet<_>>();

    let mut diff = ModelDiff::default();
    (diff.only_in_a.components, diff.only_in_b.components, diff.in_both.components) = split(comps(a), comps(b));
    (diff.only_in_a.operations, diff.only_in_b.operations, diff.in_both.operations) = split(ops(a), ops(b));
    (diff.only_in_a.call_edges, diff.only_in_b.call_edges, diff.in_both.call_edges) = split(calls(a), calls(b));
    (diff.only_in_a.dataflow_edges, diff.only_in_b.dataflow_edges, diff.in_both.dataflow_edges) =
        split(flows(a), flows(b));
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{anygraph_mini, qn};
    use crate::model::{CallEdge, Component, ComponentKind, Operation, Provenance};

    fn as_dynamic(m: &ArchitectureModel) -> ArchitectureModel {
        let (label, comps, ops, calls, flows) = m.clone().into_parts();
        let dy = Provenance::Dynamic;
        ArchitectureModel::from_parts(
            label,
            comps.into_iter().map(|c| Component { provenance: dy, ..c }).collect(),
            ops.into_iter().map(|o| Operation { provenance: dy, arity: 0, ..o }).collect(),
            calls
                .into_iter()
                .map(|e| CallEdge { provenance: dy, weight: 4, ..e })
                .collect(),
            flows,
        )
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let m = anygraph_mini();
        let merged = merge_models(&m, &ArchitectureModel::empty("e")).unwrap();
        assert_eq!(merged.components(), m.components());
        assert_eq!(merged.operations(), m.operations());
        assert_eq!(merged.call_edges(), m.call_edges());
        assert_eq!(merged.label(), format!("{} + e", m.label()));
    }

    #[test]
    fn merge_with_self_is_idempotent() {
        let m = anygraph_mini();
        let merged = merge_models(&m, &m).unwrap();
        assert_eq!(merged.with_label(m.label()), m);
    }

    #[test]
    fn static_and_dynamic_become_both_and_weights_win() {
        let s = anygraph_mini();
        let d = as_dynamic(&s);
        let merged = merge_models(&s, &d).unwrap();
        assert!(merged.components().iter().all(|c| c.provenance == Provenance::Both));
        assert!(merged.call_edges().iter().all(|e| e.weight == 4 && e.provenance == Provenance::Both));
        // arity comes from the static record
        assert_eq!(merged.operations(), &s.operations().iter().map(|o| Operation { provenance: Provenance::Both, ..o.clone() }).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn invalid_input_is_rejected() {
        let (label, comps, _, calls, flows) = anygraph_mini().into_parts();
        let broken = ArchitectureModel::from_parts(label, comps, vec![], calls, flows);
        assert!(matches!(
            merge_models(&anygraph_mini(), &broken),
            Err(MergeError::InvalidInput { side: "second", .. })
        ));
    }

    #[test]
    fn clashing_result_is_rejected() {
        let st = Provenance::Static;
        let a = ArchitectureModel::from_parts(
            "a",
            vec![Component::new(qn("m"), ComponentKind::Module, None, st)],
            vec![Operation::new(qn("m.x"), qn("m"), 0, st)],
            vec![],
            vec![],
        );
        let b = ArchitectureModel::from_parts(
            "b",
            vec![
                Component::new(qn("m"), ComponentKind::Package, None, st),
                Component::new(qn("m.x"), ComponentKind::Module, Some(qn("m")), st),
            ],
            vec![],
            vec![],
            vec![],
        );
        assert!(matches!(merge_models(&a, &b), Err(MergeError::InvalidResult(_))));
    }

    #[test]
    fn compare_partitions() {
        let m = anygraph_mini();
        let same = compare_models(&m, &m).unwrap();
        assert!(same.only_in_a.is_empty() && same.only_in_b.is_empty());
        let total = m.components().len() + m.operations().len() + m.call_edges().len() + m.dataflow_edges().len();
        assert_eq!(same.in_both.len(), total);

        let vs_empty = compare_models(&m, &ArchitectureModel::empty("")).unwrap();
        assert_eq!(vs_empty.only_in_a.len(), total);
        assert!(vs_empty.in_both.is_empty());
        let flipped = compare_models(&ArchitectureModel::empty(""), &m).unwrap();
        assert_eq!(flipped.only_in_b, vs_empty.only_in_a);
    }
}
