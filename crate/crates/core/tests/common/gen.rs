//! Random valid architecture models over a small shared name universe, so that
//! independently drawn models overlap.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use pyarch_core::model::{
    ArchitectureModel, CallEdge, Component, ComponentKind, DataflowEdge, DataflowKind, Operation, Provenance,
};
use pyarch_core::QualifiedName;

/// Component universe: packages `p*`, modules `p*.m*`, classes `p*.m*.C*`.
fn component_universe() -> Vec<QualifiedName> {
    let mut out = Vec::new();
    for p in 0..2 {
        out.push(QualifiedName::parse(&format!("p{p}")).unwrap());
        for m in 0..2 {
            out.push(QualifiedName::parse(&format!("p{p}.m{m}")).unwrap());
            for c in 0..2 {
                out.push(QualifiedName::parse(&format!("p{p}.m{m}.C{c}")).unwrap());
            }
        }
    }
    out
}

/// Operations `f*` under every module and class.
fn operation_universe() -> Vec<QualifiedName> {
    component_universe()
        .into_iter()
        .filter(|c| c.len() >= 2)
        .flat_map(|c| (0..2).map(move |f| c.child(&format!("f{f}")).unwrap()))
        .collect()
}

fn provenance() -> impl Strategy<Value = Provenance> {
    prop_oneof![Just(Provenance::Static), Just(Provenance::Dynamic), Just(Provenance::Both)]
}

fn kind() -> impl Strategy<Value = ComponentKind> {
    prop_oneof![Just(ComponentKind::Package), Just(ComponentKind::Module), Just(ComponentKind::Class)]
}

#[derive(Debug, Clone)]
struct Draw {
    components: Vec<(bool, ComponentKind, Provenance, usize)>,
    operations: Vec<(bool, u32, Provenance, usize)>,
    edges: Vec<(usize, usize, Provenance, u64)>,
    flows: Vec<(usize, usize, bool)>,
    synthetic: bool,
}

fn draw(density: f64) -> impl Strategy<Value = Draw> {
    let nc = component_universe().len();
    let no = operation_universe().len();
    (
        prop::collection::vec((prop::bool::weighted(density), kind(), provenance(), 0usize..4), nc),
        prop::collection::vec((prop::bool::weighted(density), 0u32..4, provenance(), 0usize..4), no),
        prop::collection::vec((0..no, 0..no, provenance(), 0u64..6), 0..12),
        prop::collection::vec((0..no, 0..no, any::<bool>()), 0..5),
        prop::bool::weighted(0.3),
    )
        .prop_map(|(components, operations, edges, flows, synthetic)| Draw {
            components,
            operations,
            edges,
            flows,
            synthetic,
        })
}

fn build(d: Draw, label: String) -> ArchitectureModel {
    let comps = component_universe();
    let ops = operation_universe();

    // Selected operations pull in every ancestor component.
    let mut selected: BTreeSet<QualifiedName> = BTreeSet::new();
    for (i, c) in comps.iter().enumerate() {
        if d.components[i].0 {
            selected.extend(c.ancestors());
            selected.insert(c.clone());
        }
    }
    let chosen_ops: Vec<(usize, &QualifiedName)> =
        ops.iter().enumerate().filter(|(i, _)| d.operations[*i].0).collect();
    for (_, o) in &chosen_ops {
        selected.extend(o.ancestors());
    }

    let mut components = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        if !selected.contains(c) {
            continue;
        }
        let (_, kind, prov, pick) = d.components[i];
        let prefixes = c.ancestors();
        let parent = (!prefixes.is_empty()).then(|| prefixes[pick % prefixes.len()].clone());
        components.push(Component::new(c.clone(), kind, parent, prov));
    }
    let mut operations = Vec::new();
    let mut op_prov: BTreeMap<&QualifiedName, Provenance> = BTreeMap::new();
    for (i, o) in &chosen_ops {
        let (_, arity, prov, pick) = d.operations[*i];
        let owners = o.ancestors();
        let owner = owners[pick % owners.len()].clone();
        operations.push(Operation::new((*o).clone(), owner, arity, prov));
        op_prov.insert(o, prov);
    }
    let present: Vec<&QualifiedName> = chosen_ops.iter().map(|(_, o)| *o).collect();
    let mut calls: BTreeMap<(QualifiedName, QualifiedName), CallEdge> = BTreeMap::new();
    if !present.is_empty() {
        for (a, b, prov, w) in &d.edges {
            let (caller, callee) = (present[a % present.len()], present[b % present.len()]);
            let weight = if *prov == Provenance::Static { *w } else { w.max(&1).to_owned() };
            calls
                .entry((caller.clone(), callee.clone()))
                .or_insert_with(|| CallEdge::new(caller.clone(), callee.clone(), weight, *prov));
        }
    }
    let mut flows = BTreeSet::new();
    if !present.is_empty() {
        for (a, b, ret) in &d.flows {
            let kind = if *ret { DataflowKind::ReturnValue } else { DataflowKind::Argument };
            flows.insert(DataflowEdge::new(
                present[a % present.len()].clone(),
                present[b % present.len()].clone(),
                kind,
            ));
        }
    }
    if d.synthetic && !present.is_empty() {
        components.push(Component::synthetic());
        operations.push(Operation::synthetic_entry());
        let entry = QualifiedName::synthetic_entry();
        let target = present[0].clone();
        calls.insert((entry.clone(), target.clone()), CallEdge::new(entry, target, 1, Provenance::Dynamic));
    }
    ArchitectureModel::from_parts(label, components, operations, calls.into_values().collect(), flows.into_iter().collect())
}

/// A random valid model.
pub fn model() -> impl Strategy<Value = ArchitectureModel> {
    model_with_density(0.4)
}

pub fn model_with_density(density: f64) -> impl Strategy<Value = ArchitectureModel> {
    (draw(density), 0u32..1000).prop_map(|(d, n)| build(d, format!("model{n}")))
}
