use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::rules::NameRuleSet;
use super::MergeError;
use crate::model::{
    ArchitectureModel, CallEdge, Component, DataflowEdge, ModelBuilder, Operation, QualifiedName, ValidationReport,
    WeightRule,
};

/// Several source names rewritten onto one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub element: &'static str,
    pub name: String,
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NormalizeReport {
    pub renamed: usize,
    pub collisions: Vec<Collision>,
}

fn collisions<'a>(
    element: &'static str,
    pairs: impl Iterator<Item = (String, String)> + 'a,
) -> impl Iterator<Item = Collision> + 'a {
    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (new, old) in pairs {
        groups.entry(new).or_default().insert(old);
    }
    groups.into_iter().filter(|(_, s)| s.len() > 1).map(move |(name, sources)| Collision {
        element,
        name,
        sources: sources.into_iter().collect(),
    })
}

/// Longest strict prefix of `name` that is in `components`.
fn nearest_component(name: &QualifiedName, components: &BTreeSet<QualifiedName>) -> Option<QualifiedName> {
    name.ancestors()
        .into_iter()
        .rev()
        .find(|a| a != name && components.contains(a))
}

/// Rewrites every name in `m` through `rules`.
///
/// Elements whose names collide are combined and colliding call edges sum their
/// weights. A parent or owner that no longer prefixes its element after the
/// rewrite is replaced by the nearest enclosing component.
pub fn normalize_names(
    m: &ArchitectureModel,
    rules: &NameRuleSet,
) -> Result<(ArchitectureModel, NormalizeReport), MergeError> {
    ValidationReport::check(m).map_err(|report| MergeError::InvalidInput { side: "input", report })?;
    if rules.is_empty() {
        return Ok((m.clone(), NormalizeReport::default()));
    }
    let mut report = NormalizeReport::default();
    let rename = |q: &QualifiedName| rules.apply(q);

    let component_names: BTreeSet<QualifiedName> = m.components().iter().map(|c| rename(&c.name)).collect();
    let mut builder = ModelBuilder::new(m.label());

    for c in m.components() {
        let name = rename(&c.name);
        if name != c.name {
            report.renamed += 1;
        }
        let parent = c
            .parent
            .as_ref()
            .map(rename)
            .filter(|p| p.is_strict_prefix_of(&name) && component_names.contains(p))
            .or_else(|| c.parent.as_ref().and_then(|_| nearest_component(&name, &component_names)));
        builder.add_component(Component::new(name, c.kind, parent, c.provenance));
    }
    for o in m.operations() {
        let signature = rename(&o.signature);
        if signature != o.signature {
            report.renamed += 1;
        }
        let owner = Some(rename(&o.owner))
            .filter(|p| p.is_strict_prefix_of(&signature) && component_names.contains(p))
            .or_else(|| nearest_component(&signature, &component_names))
            .ok_or_else(|| MergeError::BrokenClosure {
                element: signature.to_string(),
                detail: format!("no component encloses the rewritten owner {}", rename(&o.owner)),
            })?;
        builder.add_operation(Operation::new(signature, owner, o.arity, o.provenance));
    }
    for e in m.call_edges() {
        builder.add_call(
            CallEdge::new(rename(&e.caller), rename(&e.callee), e.weight, e.provenance),
            WeightRule::Sum,
        );
    }
    for d in m.dataflow_edges() {
        builder.add_dataflow(DataflowEdge::new(rename(&d.source), rename(&d.target), d.kind));
    }

    report.collisions.extend(collisions(
        "component",
        m.components().iter().map(|c| (rename(&c.name).to_string(), c.name.to_string())),
    ));
    report.collisions.extend(collisions(
        "operation",
        m.operations().iter().map(|o| (rename(&o.signature).to_string(), o.signature.to_string())),
    ));
    report.collisions.extend(collisions(
        "call-edge",
        m.call_edges().iter().map(|e| {
            (
                format!("{} -> {}", rename(&e.caller), rename(&e.callee)),
                format!("{} -> {}", e.caller, e.callee),
            )
        }),
    ));
    for c in &report.collisions {
        log::info!("normalization merged {} {} from {:?}", c.element, c.name, c.sources);
    }

    let out = builder.build();
    ValidationReport::check(&out).map_err(|report| MergeError::BrokenClosure {
        element: out.label().to_string(),
        detail: report.to_string(),
    })?;
    Ok((out, report))
}
