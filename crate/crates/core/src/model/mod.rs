//! Architecture model shared by every pipeline stage.
//!
//! A model is a set of components (packages, modules, classes and the synthetic
//! entry component), the operations they own, and the call and dataflow edges
//! between operations. Element collections are kept sorted by canonical name so
//! that serialized output is deterministic.

mod name;
mod stats;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use name::{NameError, QualifiedName, SYNTHETIC_COMPONENT, SYNTHETIC_ENTRY};
pub use stats::{model_stats, ModelStats, ProvenanceCounts};
pub use validate::{model_validate, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Static,
    Dynamic,
    Both,
}

impl Provenance {
    pub fn union(self, other: Provenance) -> Provenance {
        if self == other {
            self
        } else {
            Provenance::Both
        }
    }

    pub fn has_static(self) -> bool {
        matches!(self, Provenance::Static | Provenance::Both)
    }

    pub fn has_dynamic(self) -> bool {
        matches!(self, Provenance::Dynamic | Provenance::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Static => "static",
            Provenance::Dynamic => "dynamic",
            Provenance::Both => "both",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Package,
    Module,
    Class,
    Synthetic,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Package => "package",
            ComponentKind::Module => "module",
            ComponentKind::Class => "class",
            ComponentKind::Synthetic => "synthetic",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "package" => Some(ComponentKind::Package),
            "module" => Some(ComponentKind::Module),
            "class" => Some(ComponentKind::Class),
            "synthetic" => Some(ComponentKind::Synthetic),
            _ => None,
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DataflowKind {
    #[serde(rename = "return-value")]
    ReturnValue,
    #[serde(rename = "argument")]
    Argument,
}

impl DataflowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DataflowKind::ReturnValue => "return-value",
            DataflowKind::Argument => "argument",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "return-value" => Some(DataflowKind::ReturnValue),
            "argument" => Some(DataflowKind::Argument),
            _ => None,
        }
    }
}

impl fmt::Display for DataflowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub name: QualifiedName,
    pub kind: ComponentKind,
    pub parent: Option<QualifiedName>,
    pub provenance: Provenance,
}

impl Component {
    pub fn new(
        name: QualifiedName,
        kind: ComponentKind,
        parent: Option<QualifiedName>,
        provenance: Provenance,
    ) -> Self {
        Self {
            name,
            kind,
            parent,
            provenance,
        }
    }

    pub fn synthetic() -> Self {
        Self::new(
            QualifiedName::synthetic_component(),
            ComponentKind::Synthetic,
            None,
            Provenance::Dynamic,
        )
    }

    /// Combines two records of the same component.
    ///
    /// Provenance is united. Structural attributes come from a static-side record
    /// when exactly one side has one, otherwise from the smaller record, which keeps
    /// the operation commutative and associative.
    pub fn combine(&self, other: &Component) -> Component {
        let pick = prefer_static(
            self.provenance,
            other.provenance,
            (&self.kind, &self.parent),
            (&other.kind, &other.parent),
        );
        Component {
            name: self.name.clone(),
            kind: *pick.0,
            parent: pick.1.clone(),
            provenance: self.provenance.union(other.provenance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Operation {
    pub signature: QualifiedName,
    pub owner: QualifiedName,
    pub arity: u32,
    pub provenance: Provenance,
}

impl Operation {
    pub fn new(
        signature: QualifiedName,
        owner: QualifiedName,
        arity: u32,
        provenance: Provenance,
    ) -> Self {
        Self {
            signature,
            owner,
            arity,
            provenance,
        }
    }

    pub fn synthetic_entry() -> Self {
        Self::new(
            QualifiedName::synthetic_entry(),
            QualifiedName::synthetic_component(),
            0,
            Provenance::Dynamic,
        )
    }

    /// Same selection rule as [`Component::combine`].
    pub fn combine(&self, other: &Operation) -> Operation {
        let pick = prefer_static(
            self.provenance,
            other.provenance,
            (&self.owner, self.arity),
            (&other.owner, other.arity),
        );
        Operation {
            signature: self.signature.clone(),
            owner: pick.0.clone(),
            arity: pick.1,
            provenance: self.provenance.union(other.provenance),
        }
    }
}

fn prefer_static<T: Ord>(left_prov: Provenance, right_prov: Provenance, left: T, right: T) -> T {
    match (left_prov.has_static(), right_prov.has_static()) {
        (true, false) => left,
        (false, true) => right,
        _ => std::cmp::min(left, right),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CallEdge {
    pub caller: QualifiedName,
    pub callee: QualifiedName,
    pub weight: u64,
    pub provenance: Provenance,
}

impl CallEdge {
    pub fn new(caller: QualifiedName, callee: QualifiedName, weight: u64, provenance: Provenance) -> Self {
        Self {
            caller,
            callee,
            weight,
            provenance,
        }
    }

    pub fn key(&self) -> (&QualifiedName, &QualifiedName) {
        (&self.caller, &self.callee)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataflowEdge {
    pub source: QualifiedName,
    pub target: QualifiedName,
    pub kind: DataflowKind,
}

impl DataflowEdge {
    pub fn new(source: QualifiedName, target: QualifiedName, kind: DataflowKind) -> Self {
        Self {
            source,
            target,
            kind,
        }
    }
}

/// How colliding call-edge weights combine inside a [`ModelBuilder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    /// Keep the larger count (merging two views of the same run).
    Max,
    /// Add counts (several names folded into one).
    Sum,
}

/// Immutable architecture model. Collections are sorted by canonical key.
///
/// Construction through [`ArchitectureModel::from_parts`] keeps duplicates so that
/// [`model_validate`] can report them; [`ModelBuilder`] folds duplicates instead.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ArchitectureModel {
    label: String,
    components: Vec<Component>,
    operations: Vec<Operation>,
    call_edges: Vec<CallEdge>,
    dataflow_edges: Vec<DataflowEdge>,
}

impl ArchitectureModel {
    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    pub fn from_parts(
        label: impl Into<String>,
        mut components: Vec<Component>,
        mut operations: Vec<Operation>,
        mut call_edges: Vec<CallEdge>,
        mut dataflow_edges: Vec<DataflowEdge>,
    ) -> Self {
        components.sort_by(|a, b| a.name.cmp(&b.name));
        operations.sort_by(|a, b| a.signature.cmp(&b.signature));
        call_edges.sort_by(|a, b| a.key().cmp(&b.key()));
        dataflow_edges.sort();
        Self {
            label: label.into(),
            components,
            operations,
            call_edges,
            dataflow_edges,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn call_edges(&self) -> &[CallEdge] {
        &self.call_edges
    }

    pub fn dataflow_edges(&self) -> &[DataflowEdge] {
        &self.dataflow_edges
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
            && self.operations.is_empty()
            && self.call_edges.is_empty()
            && self.dataflow_edges.is_empty()
    }

    pub fn component(&self, name: &QualifiedName) -> Option<&Component> {
        self.components
            .binary_search_by(|c| c.name.cmp(name))
            .ok()
            .map(|idx| &self.components[idx])
    }

    pub fn operation(&self, signature: &QualifiedName) -> Option<&Operation> {
        self.operations
            .binary_search_by(|o| o.signature.cmp(signature))
            .ok()
            .map(|idx| &self.operations[idx])
    }

    pub fn call_edge(&self, caller: &QualifiedName, callee: &QualifiedName) -> Option<&CallEdge> {
        self.call_edges
            .binary_search_by(|e| e.key().cmp(&(caller, callee)))
            .ok()
            .map(|idx| &self.call_edges[idx])
    }

    pub fn into_parts(
        self,
    ) -> (
        String,
        Vec<Component>,
        Vec<Operation>,
        Vec<CallEdge>,
        Vec<DataflowEdge>,
    ) {
        (
            self.label,
            self.components,
            self.operations,
            self.call_edges,
            self.dataflow_edges,
        )
    }
}

/// Accumulates model elements, folding duplicates by canonical key.
#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    label: String,
    components: BTreeMap<QualifiedName, Component>,
    operations: BTreeMap<QualifiedName, Operation>,
    call_edges: BTreeMap<(QualifiedName, QualifiedName), CallEdge>,
    dataflow_edges: BTreeMap<DataflowEdge, ()>,
}

impl ModelBuilder {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn has_component(&self, name: &QualifiedName) -> bool {
        self.components.contains_key(name)
    }

    pub fn has_operation(&self, signature: &QualifiedName) -> bool {
        self.operations.contains_key(signature)
    }

    /// Returns `true` when the component was new.
    pub fn add_component(&mut self, component: Component) -> bool {
        match self.components.get_mut(&component.name) {
            Some(existing) => {
                *existing = existing.combine(&component);
                false
            }
            None => {
                self.components.insert(component.name.clone(), component);
                true
            }
        }
    }

    /// Returns `true` when the operation was new.
    pub fn add_operation(&mut self, operation: Operation) -> bool {
        match self.operations.get_mut(&operation.signature) {
            Some(existing) => {
                *existing = existing.combine(&operation);
                false
            }
            None => {
                self.operations.insert(operation.signature.clone(), operation);
                true
            }
        }
    }

    pub fn add_call(&mut self, edge: CallEdge, rule: WeightRule) {
        let key = (edge.caller.clone(), edge.callee.clone());
        match self.call_edges.get_mut(&key) {
            Some(existing) => {
                existing.weight = match rule {
                    WeightRule::Max => existing.weight.max(edge.weight),
                    WeightRule::Sum => existing.weight.saturating_add(edge.weight),
                };
                existing.provenance = existing.provenance.union(edge.provenance);
            }
            None => {
                self.call_edges.insert(key, edge);
            }
        }
    }

    pub fn add_dataflow(&mut self, edge: DataflowEdge) {
        self.dataflow_edges.insert(edge, ());
    }

    pub fn build(self) -> ArchitectureModel {
        ArchitectureModel {
            label: self.label,
            components: self.components.into_values().collect(),
            operations: self.operations.into_values().collect(),
            call_edges: self.call_edges.into_values().collect(),
            dataflow_edges: self.dataflow_edges.into_keys().collect(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn provenance_union_is_a_semilattice() {
        use Provenance::*;
        for a in [Static, Dynamic, Both] {
            assert_eq!(a.union(a), a);
            for b in [Static, Dynamic, Both] {
                assert_eq!(a.union(b), b.union(a));
            }
        }
        assert_eq!(Static.union(Dynamic), Both);
    }

    #[test]
    fn combine_prefers_static_structure() {
        let stat = Component::new(qn("pkg"), ComponentKind::Package, None, Provenance::Static);
        let dyn_ = Component::new(qn("pkg"), ComponentKind::Module, None, Provenance::Dynamic);
        let merged = dyn_.combine(&stat);
        assert_eq!(merged.kind, ComponentKind::Package);
        assert_eq!(merged.provenance, Provenance::Both);
        assert_eq!(stat.combine(&dyn_), merged);
    }

    #[test]
    fn builder_folds_duplicates() {
        let mut b = ModelBuilder::new("x");
        let f = qn("m.f");
        let g = qn("m.g");
        b.add_call(CallEdge::new(f.clone(), g.clone(), 2, Provenance::Dynamic), WeightRule::Sum);
        b.add_call(CallEdge::new(f.clone(), g.clone(), 3, Provenance::Dynamic), WeightRule::Sum);
        b.add_call(CallEdge::new(f.clone(), g.clone(), 0, Provenance::Static), WeightRule::Max);
        let m = b.build();
        assert_eq!(m.call_edges().len(), 1);
        assert_eq!(m.call_edges()[0].weight, 5);
        assert_eq!(m.call_edges()[0].provenance, Provenance::Both);
    }

    #[test]
    fn lookups_use_sorted_order() {
        let m = anygraph_mini();
        assert!(m.operation(&qn("anytree.render.fmt")).is_some());
        assert!(m.operation(&qn("anytree.render.nope")).is_none());
        assert!(m.component(&qn("anytree.walker")).is_some());
        assert!(m
            .call_edge(&qn("anytree.walker.walk"), &qn("anytree.walker._common"))
            .is_some());
    }
}
