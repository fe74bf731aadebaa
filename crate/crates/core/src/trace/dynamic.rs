use std::collections::{BTreeMap, BTreeSet};

use super::TraceSet;
use crate::model::{
    ArchitectureModel, CallEdge, Component, ComponentKind, ModelBuilder, Operation, Provenance, QualifiedName,
    WeightRule,
};

/// Component structure recovered from a bare signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureParts {
    pub module: QualifiedName,
    /// Outermost first.
    pub classes: Vec<QualifiedName>,
    pub owner: QualifiedName,
}

/// Class names start with an uppercase letter after any leading underscores.
fn class_like(segment: &str) -> bool {
    segment
        .trim_start_matches('_')
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_uppercase())
}

/// Splits `pkg.mod.Class.method` into module, classes and owner.
///
/// The first class-like segment after the first one starts the class chain;
/// the chain ends at the first non-class segment. Without a class the owner is
/// everything before the last segment.
pub fn split_signature(signature: &QualifiedName) -> SignatureParts {
    let segs: Vec<&str> = signature.segments().collect();
    let last = segs.len() - 1;
    let name = |n: usize| QualifiedName::from_segments(&segs[..n]).expect("prefix of a valid name");
    match (1..last).find(|&i| class_like(segs[i])) {
        Some(first) => {
            let module = name(first);
            let mut classes = Vec::new();
            let mut j = first;
            while j < last && class_like(segs[j]) {
                classes.push(name(j + 1));
                j += 1;
            }
            let owner = classes.last().cloned().unwrap_or_else(|| module.clone());
            SignatureParts { module, classes, owner }
        }
        None => {
            let module = name(last);
            SignatureParts {
                owner: module.clone(),
                module,
                classes: Vec::new(),
            }
        }
    }
}

/// Owner and structure for every observed signature. A signature nested under
/// another observed signature belongs to that operation's owner.
fn assign_owners(signatures: &BTreeSet<QualifiedName>) -> BTreeMap<QualifiedName, SignatureParts> {
    let mut ordered: Vec<&QualifiedName> = signatures.iter().collect();
    ordered.sort_by_key(|s| (s.len(), (*s).clone()));
    let mut out: BTreeMap<QualifiedName, SignatureParts> = BTreeMap::new();
    for sig in ordered {
        let outer = sig
            .ancestors()
            .into_iter()
            .rev()
            .find(|a| a != sig && out.contains_key(a));
        let parts = match outer {
            Some(outer) => out[&outer].clone(),
            None => split_signature(sig),
        };
        out.insert(sig.clone(), parts);
    }
    out
}

/// Dynamic model of a trace set: one operation per observed signature, call
/// weights counting invocations, and an edge from the synthetic entry
/// operation to every root event.
pub fn build_dynamic_model(set: &TraceSet, label: impl Into<String>) -> ArchitectureModel {
    let dy = Provenance::Dynamic;
    let mut builder = ModelBuilder::new(label);

    let signatures: BTreeSet<QualifiedName> = set
        .traces
        .iter()
        .flat_map(|t| t.events.iter().map(|e| e.signature.clone()))
        .collect();
    let parts = assign_owners(&signatures);

    let modules: BTreeSet<&QualifiedName> = parts.values().map(|p| &p.module).collect();
    let mut packages: BTreeSet<QualifiedName> = BTreeSet::new();
    for m in &modules {
        for a in m.ancestors() {
            if &&a != m {
                packages.insert(a);
            }
        }
    }
    for p in &packages {
        builder.add_component(Component::new(p.clone(), ComponentKind::Package, p.parent(), dy));
    }
    for m in modules {
        if !packages.contains(m) {
            builder.add_component(Component::new(m.clone(), ComponentKind::Module, m.parent(), dy));
        }
    }
    for p in parts.values() {
        for c in &p.classes {
            builder.add_component(Component::new(c.clone(), ComponentKind::Class, c.parent(), dy));
        }
    }
    for (sig, p) in &parts {
        builder.add_operation(Operation::new(sig.clone(), p.owner.clone(), 0, dy));
    }

    let entry = QualifiedName::synthetic_entry();
    for trace in &set.traces {
        for (caller, callee) in trace.calls() {
            let caller = match caller {
                Some(c) => c.clone(),
                None => {
                    if !builder.has_operation(&entry) {
                        builder.add_component(Component::synthetic());
                        builder.add_operation(Operation::synthetic_entry());
                    }
                    entry.clone()
                }
            };
            builder.add_call(CallEdge::new(caller, callee.clone(), 1, dy), WeightRule::Sum);
        }
    }
    builder.build()
}

/// Inclusive wall time per signature, summed over all invocations.
pub fn observed_time(set: &TraceSet) -> BTreeMap<QualifiedName, u64> {
    let mut out: BTreeMap<QualifiedName, u64> = BTreeMap::new();
    for t in &set.traces {
        for e in &t.events {
            *out.entry(e.signature.clone()).or_default() += e.duration_ns().unwrap_or(0);
        }
    }
    out
}
