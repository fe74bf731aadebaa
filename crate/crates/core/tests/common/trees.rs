//! Random call trees, their trace-log encoding, and a brute-force stack
//! simulator used as an independent oracle for trace replay.

use std::collections::BTreeMap;

use proptest::prelude::*;
use pyarch_core::trace::TraceEvent;
use pyarch_core::QualifiedName;

/// Caller of each event: the closest earlier event of the same trace one level up.
pub fn brute_force_pairs(text: &str) -> BTreeMap<(Option<String>, String), u64> {
    let rows: Vec<Vec<String>> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split(';').map(str::to_string).collect())
        .collect();
    let mut out = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        let (id, order, depth): (u64, u64, u64) = (row[0].parse().unwrap(), row[1].parse().unwrap(), row[2].parse().unwrap());
        let caller = if depth == 0 {
            None
        } else {
            rows.iter()
                .enumerate()
                .filter(|(j, r)| {
                    *j != i
                        && r[0].parse::<u64>().unwrap() == id
                        && r[1].parse::<u64>().unwrap() < order
                        && r[2].parse::<u64>().unwrap() == depth - 1
                })
                .max_by_key(|(_, r)| r[1].parse::<u64>().unwrap())
                .map(|(_, r)| r[3].clone())
        };
        *out.entry((caller, row[3].clone())).or_insert(0) += 1;
    }
    out
}

/// A call tree node: signature index and children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node(pub usize, pub Vec<Node>);

pub fn tree_strategy() -> impl Strategy<Value = Node> {
    let leaf = (0usize..6).prop_map(|s| Node(s, vec![]));
    leaf.prop_recursive(5, 40, 4, |inner| {
        ((0usize..6), prop::collection::vec(inner, 0..4)).prop_map(|(s, kids)| Node(s, kids))
    })
}

pub fn sig(i: usize) -> QualifiedName {
    QualifiedName::parse(&format!("pkg.mod{}.Op.f{i}", i % 2)).unwrap()
}

fn emit(node: &Node, depth: u32, id: u64, label: &str, clock: &mut i64, out: &mut Vec<TraceEvent>) {
    let index = out.len();
    out.push(TraceEvent {
        trace_id: id,
        order_index: 0,
        depth,
        signature: sig(node.0),
        entry_ns: *clock,
        exit_ns: None,
        process_label: label.to_string(),
    });
    *clock += 1;
    for child in &node.1 {
        emit(child, depth + 1, id, label, clock, out);
    }
    out[index].exit_ns = Some(*clock);
    *clock += 1;
}

pub fn serialize(forests: &[Vec<Node>]) -> Vec<Vec<TraceEvent>> {
    forests
        .iter()
        .enumerate()
        .map(|(id, roots)| {
            let mut events = Vec::new();
            let mut clock = 0;
            for r in roots {
                emit(r, 0, id as u64, "proc", &mut clock, &mut events);
            }
            for (i, e) in events.iter_mut().enumerate() {
                e.order_index = i as u64;
            }
            events
        })
        .collect()
}

/// Rebuilds the forest from depth-annotated events.
pub fn rebuild(events: &[TraceEvent]) -> Vec<Node> {
    let mut roots: Vec<Node> = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    for e in events {
        path.truncate(e.depth as usize);
        let index = (0..6).find(|&i| sig(i) == e.signature).unwrap();
        let mut siblings = &mut roots;
        for &p in &path {
            siblings = &mut siblings[p].1;
        }
        siblings.push(Node(index, vec![]));
        path.push(siblings.len() - 1);
    }
    roots
}

pub fn count_nodes(n: &Node) -> usize {
    1 + n.1.iter().map(count_nodes).sum::<usize>()
}

/// Independent traces, each a short forest of call trees.
pub fn forests(max_traces: usize) -> impl Strategy<Value = Vec<Vec<Node>>> {
    prop::collection::vec(prop::collection::vec(tree_strategy(), 1..3), 1..max_traces)
}
