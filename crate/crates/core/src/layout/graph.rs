use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::ArchitectureModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Call,
    Dataflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub id: String,
    /// `None` only for the root.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Leaf {
    pub id: String,
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("group ids must not be empty")]
    EmptyGroupId,
    #[error("group {0:?} is declared twice")]
    DuplicateGroup(String),
    #[error("leaf {0:?} is declared twice")]
    DuplicateLeaf(String),
    #[error("{what} {id:?} refers to unknown group {group:?}")]
    UnknownGroup { what: &'static str, id: String, group: String },
    #[error("group {0:?} is its own ancestor")]
    Cycle(String),
    #[error("edge endpoint {0:?} is not a leaf")]
    UnknownLeaf(String),
}

/// Leaves partitioned into a tree of groups, plus weighted edges between leaves.
///
/// Group 0 is an unnamed root. Other groups and all leaves are sorted by id and
/// edges by endpoints, so two graphs with the same content compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupedGraph {
    groups: Vec<Group>,
    leaves: Vec<Leaf>,
    edges: Vec<GraphEdge>,
    #[serde(skip)]
    child_groups: Vec<Vec<usize>>,
    #[serde(skip)]
    member_leaves: Vec<Vec<usize>>,
    #[serde(skip)]
    depths: Vec<usize>,
}

pub const ROOT: usize = 0;

impl Default for GroupedGraph {
    fn default() -> Self {
        Self::from_parts(vec![], vec![], vec![]).expect("empty graph is valid")
    }
}

impl GroupedGraph {
    /// Builds a graph from named parts. A `None` parent or group means the root.
    pub fn from_parts(
        groups: Vec<(String, Option<String>)>,
        leaves: Vec<(String, Option<String>)>,
        edges: Vec<(String, String, EdgeKind, u64)>,
    ) -> Result<Self, GraphError> {
        let mut parent_of: BTreeMap<String, Option<String>> = BTreeMap::new();
        for (id, parent) in groups {
            if id.is_empty() {
                return Err(GraphError::EmptyGroupId);
            }
            if parent_of.insert(id.clone(), parent).is_some() {
                return Err(GraphError::DuplicateGroup(id));
            }
        }
        let mut group_index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, id) in parent_of.keys().enumerate() {
            group_index.insert(id, i + 1);
        }
        let lookup = |what: &'static str, id: &str, g: &Option<String>| -> Result<usize, GraphError> {
            match g {
                None => Ok(ROOT),
                Some(g) => group_index.get(g.as_str()).copied().ok_or_else(|| GraphError::UnknownGroup {
                    what,
                    id: id.to_string(),
                    group: g.clone(),
                }),
            }
        };
        let mut out_groups = vec![Group {
            id: String::new(),
            parent: None,
        }];
        for (id, parent) in &parent_of {
            out_groups.push(Group {
                id: id.clone(),
                parent: Some(lookup("group", id, parent)?),
            });
        }

        let mut leaf_group: BTreeMap<String, Option<String>> = BTreeMap::new();
        for (id, g) in leaves {
            if leaf_group.insert(id.clone(), g).is_some() {
                return Err(GraphError::DuplicateLeaf(id));
            }
        }
        let mut out_leaves = Vec::with_capacity(leaf_group.len());
        for (id, g) in &leaf_group {
            out_leaves.push(Leaf {
                id: id.clone(),
                group: lookup("leaf", id, g)?,
            });
        }
        let leaf_index: BTreeMap<&str, usize> =
            out_leaves.iter().enumerate().map(|(i, l)| (l.id.as_str(), i)).collect();
        let mut out_edges = Vec::with_capacity(edges.len());
        for (a, b, kind, weight) in edges {
            let from = *leaf_index.get(a.as_str()).ok_or_else(|| GraphError::UnknownLeaf(a.clone()))?;
            let to = *leaf_index.get(b.as_str()).ok_or_else(|| GraphError::UnknownLeaf(b.clone()))?;
            out_edges.push(GraphEdge { from, to, kind, weight });
        }
        out_edges.sort();
        Self::assemble(out_groups, out_leaves, out_edges)
    }

    fn assemble(groups: Vec<Group>, leaves: Vec<Leaf>, edges: Vec<GraphEdge>) -> Result<Self, GraphError> {
        let n = groups.len();
        let mut depths = vec![usize::MAX; n];
        depths[ROOT] = 0;
        for start in 1..n {
            let mut chain = Vec::new();
            let mut g = start;
            while depths[g] == usize::MAX {
                if chain.len() > n {
                    return Err(GraphError::Cycle(groups[start].id.clone()));
                }
                chain.push(g);
                g = groups[g].parent.expect("only the root lacks a parent");
            }
            let mut d = depths[g];
            for &c in chain.iter().rev() {
                d += 1;
                depths[c] = d;
            }
        }
        let mut child_groups = vec![Vec::new(); n];
        for (i, g) in groups.iter().enumerate().skip(1) {
            child_groups[g.parent.expect("non-root")].push(i);
        }
        let mut member_leaves = vec![Vec::new(); n];
        for (i, l) in leaves.iter().enumerate() {
            member_leaves[l.group].push(i);
        }
        Ok(Self {
            groups,
            leaves,
            edges,
            child_groups,
            member_leaves,
            depths,
        })
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Groups other than the root.
    pub fn group_count(&self) -> usize {
        self.groups.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.groups.len() == 1 && self.leaves.is_empty()
    }

    pub fn child_groups(&self, group: usize) -> &[usize] {
        &self.child_groups[group]
    }

    pub fn member_leaves(&self, group: usize) -> &[usize] {
        &self.member_leaves[group]
    }

    pub fn group_depth(&self, group: usize) -> usize {
        self.depths[group]
    }

    /// Depth of the deepest group; 0 when only the root exists.
    pub fn depth(&self) -> usize {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    /// Leaves in `group` and all of its descendants.
    pub fn leaf_count_below(&self, group: usize) -> usize {
        self.member_leaves[group].len()
            + self.child_groups[group]
                .iter()
                .map(|&c| self.leaf_count_below(c))
                .sum::<usize>()
    }

    pub fn group_index(&self, id: &str) -> Option<usize> {
        if id.is_empty() {
            return Some(ROOT);
        }
        self.groups[1..]
            .binary_search_by(|g| g.id.as_str().cmp(id))
            .ok()
            .map(|i| i + 1)
    }

    pub fn leaf_index(&self, id: &str) -> Option<usize> {
        self.leaves.binary_search_by(|l| l.id.as_str().cmp(id)).ok()
    }
}

/// Grouped graph of a model: components become groups, operations become
/// leaves, call edges (and dataflow edges when asked) become edges.
pub fn build_grouped_graph(m: &ArchitectureModel, include_dataflow: bool) -> GroupedGraph {
    let groups = m
        .components()
        .iter()
        .map(|c| (c.name.to_string(), c.parent.as_ref().map(|p| p.to_string())))
        .collect();
    let leaves = m
        .operations()
        .iter()
        .map(|o| (o.signature.to_string(), Some(o.owner.to_string())))
        .collect();
    let mut edges: Vec<(String, String, EdgeKind, u64)> = m
        .call_edges()
        .iter()
        .map(|e| (e.caller.to_string(), e.callee.to_string(), EdgeKind::Call, e.weight))
        .collect();
    if include_dataflow {
        edges.extend(
            m.dataflow_edges()
                .iter()
                .map(|d| (d.source.to_string(), d.target.to_string(), EdgeKind::Dataflow, 1)),
        );
    }
    GroupedGraph::from_parts(groups, leaves, edges).expect("a valid model gives a valid grouped graph")
}
