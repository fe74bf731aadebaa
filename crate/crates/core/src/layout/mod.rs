//! Grouped force-directed layout and SVG rendering.
//!
//! Every group is laid out on its own: its child groups (collapsed to one body
//! whose mass is their leaf count) and its own leaves are placed by a force
//! simulation, separated until no two boxes overlap, and wrapped in a padded
//! rectangle. Groups are sized deepest first, so a parent always knows the
//! size of its children, and then translated into their parent's frame top
//! down. Sibling groups are independent and run in parallel.

mod dot;
mod force;
mod graph;
mod svg;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dot::{read_dot, DotError};
pub use force::BARNES_HUT_THRESHOLD;
pub use graph::{build_grouped_graph, EdgeKind, GraphEdge, GraphError, Group, GroupedGraph, Leaf, ROOT};
pub use svg::{render_svg, SvgStyle};

use force::{Body, Spring};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct LayoutParams {
    /// Steps for the top level, where the largest groups meet.
    pub iterations_inter_group: u32,
    /// Steps inside every other group.
    pub iterations_intra_group: u32,
    pub repulsion_constant: f64,
    pub spring_constant: f64,
    pub spring_rest_length: f64,
    pub cooling_factor: f64,
    /// Pull towards the centre of each group's items, per unit of distance.
    pub gravity: f64,
    pub rng_seed: u64,
    /// Space between a group's border and its content, and between siblings.
    pub group_padding: f64,
    /// Extra space above a group's content for its label.
    pub label_height: f64,
    pub leaf_width: f64,
    pub leaf_height: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            iterations_inter_group: 300,
            iterations_intra_group: 150,
            repulsion_constant: 20_000.0,
            spring_constant: 0.05,
            spring_rest_length: 80.0,
            cooling_factor: 0.95,
            gravity: 0.02,
            rng_seed: 0,
            group_padding: 12.0,
            label_height: 14.0,
            leaf_width: 60.0,
            leaf_height: 24.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid layout parameter {name}: {detail}")]
pub struct ParamError {
    pub name: &'static str,
    pub detail: String,
}

impl LayoutParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |name: &'static str, detail: String| Err(ParamError { name, detail });
        if self.iterations_inter_group == 0 {
            return bad("iterations-inter-group", "must be positive".into());
        }
        if self.iterations_intra_group == 0 {
            return bad("iterations-intra-group", "must be positive".into());
        }
        for (name, v) in [
            ("repulsion-constant", self.repulsion_constant),
            ("spring-constant", self.spring_constant),
            ("spring-rest-length", self.spring_rest_length),
            ("leaf-width", self.leaf_width),
            ("leaf-height", self.leaf_height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(name, format!("must be a positive number, got {v}"));
            }
        }
        for (name, v) in [
            ("group-padding", self.group_padding),
            ("label-height", self.label_height),
            ("gravity", self.gravity),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(name, format!("must be a non-negative number, got {v}"));
            }
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling-factor", format!("must lie in (0, 1), got {}", self.cooling_factor));
        }
        Ok(())
    }
}

/// Axis-aligned rectangle; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn centered(c: [f64; 2], width: f64, height: f64) -> Self {
        Rect {
            x: c[0] - width / 2.0,
            y: c[1] - height / 2.0,
            width,
            height,
        }
    }

    pub fn center(&self) -> [f64; 2] {
        [self.x + self.width / 2.0, self.y + self.height / 2.0]
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.bottom() <= self.bottom()
    }

    /// True when the interiors intersect; touching edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.bottom() && other.y < self.bottom()
    }

    fn translate(&self, d: [f64; 2]) -> Rect {
        Rect {
            x: self.x + d[0],
            y: self.y + d[1],
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutResult {
    /// Leaf centres, indexed like [`GroupedGraph::leaves`].
    pub leaves: Vec<[f64; 2]>,
    /// Group rectangles, indexed like [`GroupedGraph::groups`]; entry 0 is the root.
    pub groups: Vec<Rect>,
    pub canvas: Rect,
    pub leaf_width: f64,
    pub leaf_height: f64,
    /// Groups whose content needed the grid fallback to clear overlaps.
    pub grid_fallbacks: usize,
}

impl LayoutResult {
    pub fn leaf_box(&self, leaf: usize) -> Rect {
        Rect::centered(self.leaves[leaf], self.leaf_width, self.leaf_height)
    }
}

/// Local layout of one group in its own frame.
#[derive(Debug, Clone)]
struct Local {
    rect: Rect,
    /// Centres of child groups, then of member leaves.
    items: Vec<[f64; 2]>,
    grid: bool,
}

const SEPARATION_ROUNDS: usize = 400;

fn overlapping_pairs(boxes: &[Rect], mut visit: impl FnMut(usize, usize) -> bool) -> usize {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[a].x.total_cmp(&boxes[b].x).then(a.cmp(&b)));
    let mut count = 0;
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        active.retain(|&j| boxes[j].right() > boxes[i].x);
        for &j in &active {
            if boxes[i].overlaps(&boxes[j]) {
                count += 1;
                if !visit(i.min(j), i.max(j)) {
                    return count;
                }
            }
        }
        active.push(i);
    }
    count
}

/// Pushes overlapping boxes apart along the line between their centres until
/// none overlap. Sizes include half the sibling gap on each side.
fn separate(centers: &mut [[f64; 2]], sizes: &[[f64; 2]]) -> bool {
    let boxes_of = |c: &[[f64; 2]]| -> Vec<Rect> {
        c.iter().zip(sizes).map(|(c, s)| Rect::centered(*c, s[0], s[1])).collect()
    };
    for _ in 0..SEPARATION_ROUNDS {
        let boxes = boxes_of(centers);
        let mut pairs = Vec::new();
        overlapping_pairs(&boxes, |i, j| {
            pairs.push((i, j));
            true
        });
        if pairs.is_empty() {
            return true;
        }
        for (i, j) in pairs {
            let (a, b) = (centers[i], centers[j]);
            let (hw, hh) = ((sizes[i][0] + sizes[j][0]) / 2.0, (sizes[i][1] + sizes[j][1]) / 2.0);
            let (mut dx, mut dy) = (a[0] - b[0], a[1] - b[1]);
            let (ox, oy) = (hw - dx.abs(), hh - dy.abs());
            if ox <= 0.0 || oy <= 0.0 {
                continue;
            }
            let len = (dx * dx + dy * dy).sqrt();
            if len < 1e-9 {
                let angle = ((i * 7 + j * 13) % 360) as f64 * std::f64::consts::PI / 180.0;
                dx = angle.cos();
                dy = angle.sin();
            } else {
                dx /= len;
                dy /= len;
            }
            let mut s = f64::INFINITY;
            if dx.abs() > 1e-12 {
                s = s.min(ox / dx.abs());
            }
            if dy.abs() > 1e-12 {
                s = s.min(oy / dy.abs());
            }
            let s = s * 1.0001 + 1e-6;
            centers[i] = [a[0] + dx * s / 2.0, a[1] + dy * s / 2.0];
            centers[j] = [b[0] - dx * s / 2.0, b[1] - dy * s / 2.0];
        }
    }
    overlapping_pairs(&boxes_of(centers), |_, _| false) == 0
}

/// Packs boxes into rows in reading order of their current positions.
fn grid_pack(centers: &mut [[f64; 2]], sizes: &[[f64; 2]]) {
    let n = centers.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        centers[a][1]
            .total_cmp(&centers[b][1])
            .then(centers[a][0].total_cmp(&centers[b][0]))
            .then(a.cmp(&b))
    });
    let area: f64 = sizes.iter().map(|s| s[0] * s[1]).sum();
    let widest = sizes.iter().map(|s| s[0]).fold(0.0, f64::max);
    let row_width = area.sqrt().max(widest);
    let mean = centers.iter().fold([0.0, 0.0], |m, c| [m[0] + c[0] / n as f64, m[1] + c[1] / n as f64]);
    let (mut x, mut y, mut row_h) = (0.0f64, 0.0f64, 0.0f64);
    for i in order {
        if x > 0.0 && x + sizes[i][0] > row_width {
            x = 0.0;
            y += row_h;
            row_h = 0.0;
        }
        centers[i] = [mean[0] + x + sizes[i][0] / 2.0, mean[1] + y + sizes[i][1] / 2.0];
        x += sizes[i][0];
        row_h = row_h.max(sizes[i][1]);
    }
}

fn layout_group(
    g: &GroupedGraph,
    group: usize,
    child_sizes: &[[f64; 2]],
    springs: &[Spring],
    p: &LayoutParams,
) -> Local {
    let kids = g.child_groups(group);
    let members = g.member_leaves(group);
    let mut sizes: Vec<[f64; 2]> = child_sizes.to_vec();
    sizes.extend(std::iter::repeat_n([p.leaf_width, p.leaf_height], members.len()));
    let mut bodies: Vec<Body> = kids
        .iter()
        .map(|&c| Body {
            mass: g.leaf_count_below(c).max(1) as f64,
            radius: 0.0,
        })
        .collect();
    bodies.extend(std::iter::repeat_n(Body { mass: 1.0, radius: 0.0 }, members.len()));
    for (b, s) in bodies.iter_mut().zip(&sizes) {
        b.radius = (s[0] * s[0] + s[1] * s[1]).sqrt() / 2.0;
    }

    let n = bodies.len();
    let mut grid = false;
    let items = if n == 0 {
        Vec::new()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
        rng.set_stream(group as u64);
        let start = force::initial_positions(n, p, &mut rng);
        let iterations = if group == ROOT {
            p.iterations_inter_group
        } else {
            p.iterations_intra_group
        };
        let mut centers = force::simulate(&bodies, springs, start, iterations, p);
        let spaced: Vec<[f64; 2]> = sizes.iter().map(|s| [s[0] + p.group_padding, s[1] + p.group_padding]).collect();
        if !separate(&mut centers, &spaced) {
            grid_pack(&mut centers, &spaced);
            grid = true;
        }
        centers
    };

    let rect = if items.is_empty() {
        Rect {
            x: -p.group_padding,
            y: -p.group_padding - p.label_height,
            width: 2.0 * p.group_padding,
            height: 2.0 * p.group_padding + p.label_height,
        }
    } else {
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for (c, s) in items.iter().zip(&sizes) {
            lo = [lo[0].min(c[0] - s[0] / 2.0), lo[1].min(c[1] - s[1] / 2.0)];
            hi = [hi[0].max(c[0] + s[0] / 2.0), hi[1].max(c[1] + s[1] / 2.0)];
        }
        Rect {
            x: lo[0] - p.group_padding,
            y: lo[1] - p.group_padding - p.label_height,
            width: hi[0] - lo[0] + 2.0 * p.group_padding,
            height: hi[1] - lo[1] + 2.0 * p.group_padding + p.label_height,
        }
    };
    Local { rect, items, grid }
}

/// Springs of every group: each edge is lifted to the two items of the lowest
/// group containing both endpoints, and parallel lifts add their weights.
fn group_springs(g: &GroupedGraph) -> Vec<Vec<Spring>> {
    let n = g.groups().len();
    let mut slot_of_group = vec![0usize; n];
    for grp in 0..n {
        for (i, &c) in g.child_groups(grp).iter().enumerate() {
            slot_of_group[c] = i;
        }
    }
    let mut slot_of_leaf = vec![0usize; g.leaves().len()];
    for grp in 0..n {
        let base = g.child_groups(grp).len();
        for (i, &l) in g.member_leaves(grp).iter().enumerate() {
            slot_of_leaf[l] = base + i;
        }
    }
    let mut acc: Vec<BTreeMap<(usize, usize), f64>> = vec![BTreeMap::new(); n];
    for e in g.edges() {
        // (containing group, slot in it)
        let mut x = (g.leaves()[e.from].group, slot_of_leaf[e.from]);
        let mut y = (g.leaves()[e.to].group, slot_of_leaf[e.to]);
        while x.0 != y.0 {
            let lift = |v: (usize, usize)| {
                let parent = g.groups()[v.0].parent.expect("root is the shallowest group");
                (parent, slot_of_group[v.0])
            };
            if g.group_depth(x.0) >= g.group_depth(y.0) {
                x = lift(x);
            } else {
                y = lift(y);
            }
        }
        if x.1 != y.1 {
            let key = (x.1.min(y.1), x.1.max(y.1));
            *acc[x.0].entry(key).or_default() += e.weight.max(1) as f64;
        }
    }
    acc.into_iter()
        .map(|m| m.into_iter().map(|((a, b), weight)| Spring { a, b, weight }).collect())
        .collect()
}

/// Lays out a grouped graph. Equal inputs give bit-identical results.
pub fn layout(g: &GroupedGraph, p: &LayoutParams) -> LayoutResult {
    let n = g.groups().len();
    let springs = group_springs(g);
    let mut locals: Vec<Option<Local>> = vec![None; n];
    let max_depth = g.depth();
    for depth in (0..=max_depth).rev() {
        let level: Vec<usize> = (0..n).filter(|&i| g.group_depth(i) == depth).collect();
        let done: Vec<(usize, Local)> = level
            .par_iter()
            .map(|&grp| {
                let child_sizes: Vec<[f64; 2]> = g
                    .child_groups(grp)
                    .iter()
                    .map(|&c| {
                        let r = locals[c].as_ref().expect("children are laid out first").rect;
                        [r.width, r.height]
                    })
                    .collect();
                (grp, layout_group(g, grp, &child_sizes, &springs[grp], p))
            })
            .collect();
        for (grp, local) in done {
            locals[grp] = Some(local);
        }
    }
    let locals: Vec<Local> = locals.into_iter().map(|l| l.expect("every group is laid out")).collect();

    let mut offsets = vec![[0.0f64; 2]; n];
    let mut groups = vec![Rect::default(); n];
    let mut leaves = vec![[0.0f64; 2]; g.leaves().len()];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| g.group_depth(i));
    for grp in order {
        let off = offsets[grp];
        groups[grp] = locals[grp].rect.translate(off);
        let kids = g.child_groups(grp);
        for (slot, &c) in kids.iter().enumerate() {
            let at = locals[grp].items[slot];
            let cc = locals[c].rect.center();
            offsets[c] = [off[0] + at[0] - cc[0], off[1] + at[1] - cc[1]];
        }
        for (i, &l) in g.member_leaves(grp).iter().enumerate() {
            let at = locals[grp].items[kids.len() + i];
            leaves[l] = [off[0] + at[0], off[1] + at[1]];
        }
    }
    LayoutResult {
        leaves,
        canvas: groups[ROOT],
        groups,
        leaf_width: p.leaf_width,
        leaf_height: p.leaf_height,
        grid_fallbacks: locals.iter().filter(|l| l.grid).count(),
    }
}
