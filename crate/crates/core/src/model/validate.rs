use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{ArchitectureModel, ComponentKind, Provenance, QualifiedName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DuplicateComponent,
    DuplicateOperation,
    DuplicateCallEdge,
    DuplicateDataflowEdge,
    ParentNotPrefix,
    MissingParent,
    SyntheticName,
    MissingOwner,
    OwnerNotPrefix,
    NameClash,
    DanglingCaller,
    DanglingCallee,
    DanglingDataflowSource,
    DanglingDataflowTarget,
    UnobservedDynamicEdge,
}

impl ViolationKind {
    pub fn code(self) -> &'static str {
        match self {
            ViolationKind::DuplicateComponent => "duplicate-component",
            ViolationKind::DuplicateOperation => "duplicate-operation",
            ViolationKind::DuplicateCallEdge => "duplicate-call-edge",
            ViolationKind::DuplicateDataflowEdge => "duplicate-dataflow-edge",
            ViolationKind::ParentNotPrefix => "parent-not-prefix",
            ViolationKind::MissingParent => "missing-parent",
            ViolationKind::SyntheticName => "synthetic-name",
            ViolationKind::MissingOwner => "missing-owner",
            ViolationKind::OwnerNotPrefix => "owner-not-prefix",
            ViolationKind::NameClash => "name-clash",
            ViolationKind::DanglingCaller => "dangling-caller",
            ViolationKind::DanglingCallee => "dangling-callee",
            ViolationKind::DanglingDataflowSource => "dangling-dataflow-source",
            ViolationKind::DanglingDataflowTarget => "dangling-dataflow-target",
            ViolationKind::UnobservedDynamicEdge => "unobserved-dynamic-edge",
        }
    }
}

/// One broken model invariant: which rule, which element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub element: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind.code(), self.element, self.detail)
    }
}

/// Non-empty list of violations, usable as an error value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model has {} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(10) {
            write!(f, "\n  {v}")?;
        }
        if self.violations.len() > 10 {
            write!(f, "\n  ...")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

impl ValidationReport {
    /// `Ok(())` for a valid model, the report otherwise.
    pub fn check(model: &ArchitectureModel) -> Result<(), ValidationReport> {
        let violations = model_validate(model);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { violations })
        }
    }
}

fn push(out: &mut Vec<Violation>, kind: ViolationKind, element: impl fmt::Display, detail: String) {
    out.push(Violation {
        kind,
        element: element.to_string(),
        detail,
    });
}

/// Checks every model invariant; an empty result means the model is valid.
pub fn model_validate(m: &ArchitectureModel) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut component_names: BTreeSet<&QualifiedName> = BTreeSet::new();
    for c in m.components() {
        if !component_names.insert(&c.name) {
            push(&mut out, ViolationKind::DuplicateComponent, &c.name, "component listed twice".into());
        }
    }
    let mut op_names: BTreeSet<&QualifiedName> = BTreeSet::new();
    for o in m.operations() {
        if !op_names.insert(&o.signature) {
            push(&mut out, ViolationKind::DuplicateOperation, &o.signature, "operation listed twice".into());
        }
    }

    for c in m.components() {
        let reserved = c.name == QualifiedName::synthetic_component();
        let synthetic = c.kind == ComponentKind::Synthetic;
        if reserved != synthetic {
            push(
                &mut out,
                ViolationKind::SyntheticName,
                &c.name,
                format!("kind {} does not match the reserved synthetic name", c.kind),
            );
        } else if !synthetic && c.name.is_synthetic() {
            push(
                &mut out,
                ViolationKind::SyntheticName,
                &c.name,
                "only the synthetic component may use the reserved namespace".into(),
            );
        }
        if let Some(parent) = &c.parent {
            if !parent.is_strict_prefix_of(&c.name) {
                push(
                    &mut out,
                    ViolationKind::ParentNotPrefix,
                    &c.name,
                    format!("parent {parent} is not a strict prefix"),
                );
            } else if !component_names.contains(parent) {
                push(&mut out, ViolationKind::MissingParent, &c.name, format!("parent {parent} not in model"));
            }
        }
    }

    for o in m.operations() {
        if !component_names.contains(&o.owner) {
            push(&mut out, ViolationKind::MissingOwner, &o.signature, format!("owner {} not in model", o.owner));
        } else if !o.owner.is_strict_prefix_of(&o.signature) {
            push(
                &mut out,
                ViolationKind::OwnerNotPrefix,
                &o.signature,
                format!("owner {} is not a strict prefix", o.owner),
            );
        }
        if component_names.contains(&o.signature) {
            push(
                &mut out,
                ViolationKind::NameClash,
                &o.signature,
                "operation shares its name with a component".into(),
            );
        }
    }

    let mut seen_calls = BTreeSet::new();
    for e in m.call_edges() {
        let label = format!("{} -> {}", e.caller, e.callee);
        if !seen_calls.insert(e.key()) {
            push(&mut out, ViolationKind::DuplicateCallEdge, &label, "call edge listed twice".into());
        }
        if !op_names.contains(&e.caller) {
            push(&mut out, ViolationKind::DanglingCaller, &label, format!("caller {} not in model", e.caller));
        }
        if !op_names.contains(&e.callee) {
            push(&mut out, ViolationKind::DanglingCallee, &label, format!("callee {} not in model", e.callee));
        }
        if e.provenance != Provenance::Static && e.weight == 0 {
            push(
                &mut out,
                ViolationKind::UnobservedDynamicEdge,
                &label,
                format!("provenance {} requires weight >= 1", e.provenance),
            );
        }
    }

    let mut seen_flows = BTreeSet::new();
    for d in m.dataflow_edges() {
        let label = format!("{} -> {} ({})", d.source, d.target, d.kind);
        if !seen_flows.insert(d) {
            push(&mut out, ViolationKind::DuplicateDataflowEdge, &label, "dataflow edge listed twice".into());
        }
        if !op_names.contains(&d.source) {
            push(&mut out, ViolationKind::DanglingDataflowSource, &label, format!("source {} not in model", d.source));
        }
        if !op_names.contains(&d.target) {
            push(&mut out, ViolationKind::DanglingDataflowTarget, &label, format!("target {} not in model", d.target));
        }
    }

    out
}
