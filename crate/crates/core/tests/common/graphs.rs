//! Random grouped graphs and an independent checker for layout results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pyarch_core::layout::{EdgeKind, GroupedGraph, LayoutResult, Rect, ROOT};

/// Group `gK` hangs under a random earlier group or the root; leaves land in
/// any group including the root.
pub fn random_grouped(leaves: usize, groups: usize, edges: usize, seed: u64) -> GroupedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |k: usize| format!("g{k:04}");
    let group_parts: Vec<(String, Option<String>)> = (0..groups)
        .map(|k| {
            let parent = rng.gen_range(0..=k);
            (name(k), (parent < k).then(|| name(parent)))
        })
        .collect();
    let leaf_parts: Vec<(String, Option<String>)> = (0..leaves)
        .map(|i| {
            let g = rng.gen_range(0..=groups);
            (format!("n{i:05}"), (g < groups).then(|| name(g)))
        })
        .collect();
    let edge_parts = (0..if leaves == 0 { 0 } else { edges })
        .map(|_| {
            let a = rng.gen_range(0..leaves);
            let b = rng.gen_range(0..leaves);
            let kind = if rng.gen_bool(0.1) { EdgeKind::Dataflow } else { EdgeKind::Call };
            (format!("n{a:05}"), format!("n{b:05}"), kind, rng.gen_range(0..10))
        })
        .collect();
    GroupedGraph::from_parts(group_parts, leaf_parts, edge_parts).unwrap()
}

#[derive(Debug, Default)]
pub struct LayoutViolations {
    pub leaf_outside_group: Vec<String>,
    pub child_outside_parent: Vec<String>,
    pub sibling_overlaps: Vec<(String, String)>,
}

impl LayoutViolations {
    pub fn is_empty(&self) -> bool {
        self.leaf_outside_group.is_empty() && self.child_outside_parent.is_empty() && self.sibling_overlaps.is_empty()
    }
}

fn inside(outer: &Rect, inner: &Rect) -> bool {
    inner.x >= outer.x
        && inner.y >= outer.y
        && inner.x + inner.width <= outer.x + outer.width
        && inner.y + inner.height <= outer.y + outer.height
}

fn interiors_meet(a: &Rect, b: &Rect) -> bool {
    a.x < b.x + b.width && b.x < a.x + a.width && a.y < b.y + b.height && b.y < a.y + a.height
}

/// Brute-force check of containment and sibling separation.
pub fn check_layout(g: &GroupedGraph, r: &LayoutResult) -> LayoutViolations {
    let mut v = LayoutViolations::default();
    let leaf_box = |i: usize| {
        let c = r.leaves[i];
        Rect {
            x: c[0] - r.leaf_width / 2.0,
            y: c[1] - r.leaf_height / 2.0,
            width: r.leaf_width,
            height: r.leaf_height,
        }
    };
    for (i, leaf) in g.leaves().iter().enumerate() {
        if !inside(&r.groups[leaf.group], &leaf_box(i)) {
            v.leaf_outside_group.push(leaf.id.clone());
        }
    }
    for (k, grp) in g.groups().iter().enumerate() {
        if let Some(p) = grp.parent {
            if !inside(&r.groups[p], &r.groups[k]) {
                v.child_outside_parent.push(grp.id.clone());
            }
        }
    }
    for k in 0..g.groups().len() {
        let mut items: Vec<(String, Rect)> = Vec::new();
        for (j, grp) in g.groups().iter().enumerate() {
            if grp.parent == Some(k) {
                items.push((format!("group {}", grp.id), r.groups[j]));
            }
        }
        for (i, leaf) in g.leaves().iter().enumerate() {
            if leaf.group == k {
                items.push((format!("leaf {}", leaf.id), leaf_box(i)));
            }
        }
        for a in 0..items.len() {
            for b in a + 1..items.len() {
                if interiors_meet(&items[a].1, &items[b].1) {
                    v.sibling_overlaps.push((items[a].0.clone(), items[b].0.clone()));
                }
            }
        }
    }
    let _ = ROOT;
    v
}
