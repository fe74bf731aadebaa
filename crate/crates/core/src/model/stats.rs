use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use super::{ArchitectureModel, Provenance, QualifiedName, ValidationReport};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ProvenanceCounts {
    #[serde(rename = "static")]
    pub static_: usize,
    pub dynamic: usize,
    pub both: usize,
}

impl ProvenanceCounts {
    fn add(&mut self, p: Provenance) {
        match p {
            Provenance::Static => self.static_ += 1,
            Provenance::Dynamic => self.dynamic += 1,
            Provenance::Both => self.both += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.static_ + self.dynamic + self.both
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    pub components: usize,
    pub operations: usize,
    pub call_edges: usize,
    pub dataflow_edges: usize,
    pub components_by_provenance: ProvenanceCounts,
    pub operations_by_provenance: ProvenanceCounts,
    pub call_edges_by_provenance: ProvenanceCounts,
    /// Weakly connected components of the call graph over all operations.
    pub connected_components: usize,
    /// Total observed wall time per operation, filled from traces when available.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub observed_time_ns: BTreeMap<QualifiedName, u64>,
}

impl ModelStats {
    pub fn with_observed_time(mut self, times: BTreeMap<QualifiedName, u64>) -> Self {
        self.observed_time_ns = times;
        self
    }
}

/// Element counts and call-graph fragmentation of a valid model.
pub fn model_stats(m: &ArchitectureModel) -> Result<ModelStats, ValidationReport> {
    ValidationReport::check(m)?;

    let mut stats = ModelStats {
        components: m.components().len(),
        operations: m.operations().len(),
        call_edges: m.call_edges().len(),
        dataflow_edges: m.dataflow_edges().len(),
        ..ModelStats::default()
    };
    for c in m.components() {
        stats.components_by_provenance.add(c.provenance);
    }
    for o in m.operations() {
        stats.operations_by_provenance.add(o.provenance);
    }
    for e in m.call_edges() {
        stats.call_edges_by_provenance.add(e.provenance);
    }
    stats.connected_components = weakly_connected_components(m);
    Ok(stats)
}

/// Breadth-first count over the undirected view of the call edges.
fn weakly_connected_components(m: &ArchitectureModel) -> usize {
    let index: HashMap<&QualifiedName, usize> = m
        .operations()
        .iter()
        .enumerate()
        .map(|(i, o)| (&o.signature, i))
        .collect();
    let mut adjacency = vec![Vec::new(); index.len()];
    for e in m.call_edges() {
        let (a, b) = (index[&e.caller], index[&e.callee]);
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut seen = vec![false; adjacency.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..adjacency.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            for &next in &adjacency[node] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    count
}
