//! Force simulation for the items of one group.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::LayoutParams;

/// Item counts above this use the quadtree for repulsion.
pub const BARNES_HUT_THRESHOLD: usize = 500;

const THETA: f64 = 0.9;
const MIN_DISTANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub mass: f64,
    /// Half the diagonal of the item's box, added to the spring rest length.
    pub radius: f64,
}

/// Aggregated edge between two items of the same group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spring {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Initial positions on a disc scaled to the item count.
pub fn initial_positions(n: usize, params: &LayoutParams, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    if n == 1 {
        return vec![[0.0, 0.0]];
    }
    let scale = params.spring_rest_length * (n as f64).sqrt();
    (0..n)
        .map(|_| {
            let r: f64 = rng.gen::<f64>().sqrt() * scale;
            let t: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

struct Cell {
    center: [f64; 2],
    half: f64,
    mass: f64,
    com: [f64; 2],
    children: Option<[usize; 4]>,
    bodies: Vec<usize>,
}

/// Quadtree holding body masses for approximate repulsion.
struct QuadTree {
    cells: Vec<Cell>,
}

const MAX_TREE_DEPTH: usize = 24;

impl QuadTree {
    fn build(pos: &[[f64; 2]], bodies: &[Body]) -> Self {
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in pos {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let half = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / 2.0).max(1.0) * 1.001;
        let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let mut tree = QuadTree {
            cells: vec![Cell {
                center,
                half,
                mass: 0.0,
                com: [0.0; 2],
                children: None,
                bodies: Vec::new(),
            }],
        };
        for i in 0..pos.len() {
            tree.insert(0, i, pos, 0);
        }
        tree.summarize(0, pos, bodies);
        tree
    }

    fn quadrant(&self, cell: usize, p: [f64; 2]) -> usize {
        let c = self.cells[cell].center;
        usize::from(p[0] >= c[0]) + 2 * usize::from(p[1] >= c[1])
    }

    fn split(&mut self, cell: usize) {
        let (c, h) = (self.cells[cell].center, self.cells[cell].half / 2.0);
        let mut kids = [0usize; 4];
        for (q, kid) in kids.iter_mut().enumerate() {
            let dx = if q & 1 == 1 { h } else { -h };
            let dy = if q & 2 == 2 { h } else { -h };
            self.cells.push(Cell {
                center: [c[0] + dx, c[1] + dy],
                half: h,
                mass: 0.0,
                com: [0.0; 2],
                children: None,
                bodies: Vec::new(),
            });
            *kid = self.cells.len() - 1;
        }
        self.cells[cell].children = Some(kids);
    }

    fn insert(&mut self, cell: usize, body: usize, pos: &[[f64; 2]], depth: usize) {
        if let Some(kids) = self.cells[cell].children {
            let q = self.quadrant(cell, pos[body]);
            self.insert(kids[q], body, pos, depth + 1);
            return;
        }
        if self.cells[cell].bodies.is_empty() || depth >= MAX_TREE_DEPTH {
            self.cells[cell].bodies.push(body);
            return;
        }
        let existing = std::mem::take(&mut self.cells[cell].bodies);
        self.split(cell);
        for b in existing.into_iter().chain(std::iter::once(body)) {
            self.insert(cell, b, pos, depth);
        }
    }

    fn summarize(&mut self, cell: usize, pos: &[[f64; 2]], bodies: &[Body]) {
        let (mut m, mut x, mut y) = (0.0, 0.0, 0.0);
        if let Some(kids) = self.cells[cell].children {
            for k in kids {
                self.summarize(k, pos, bodies);
                let c = &self.cells[k];
                m += c.mass;
                x += c.com[0] * c.mass;
                y += c.com[1] * c.mass;
            }
        } else {
            for &b in &self.cells[cell].bodies {
                m += bodies[b].mass;
                x += pos[b][0] * bodies[b].mass;
                y += pos[b][1] * bodies[b].mass;
            }
        }
        let cell = &mut self.cells[cell];
        cell.mass = m;
        if m > 0.0 {
            cell.com = [x / m, y / m];
        }
    }

    /// Repulsive displacement on body `i` per unit of its own mass.
    fn push(&self, i: usize, pos: &[[f64; 2]], bodies: &[Body], k: f64, out: &mut [f64; 2]) {
        let mut stack = vec![0usize];
        while let Some(c) = stack.pop() {
            let cell = &self.cells[c];
            if cell.mass == 0.0 {
                continue;
            }
            match cell.children {
                None => {
                    for &j in &cell.bodies {
                        if j != i {
                            add_repulsion(pos[i], pos[j], bodies[j].mass, k, i, j, out);
                        }
                    }
                }
                Some(kids) => {
                    let dx = pos[i][0] - cell.com[0];
                    let dy = pos[i][1] - cell.com[1];
                    let d = (dx * dx + dy * dy).sqrt();
                    if d > 0.0 && 2.0 * cell.half / d < THETA {
                        add_repulsion(pos[i], cell.com, cell.mass, k, i, usize::MAX, out);
                    } else {
                        stack.extend(kids);
                    }
                }
            }
        }
    }
}

/// Adds `k * other_mass / d^2` along the line from `q` to `p`. Coincident
/// points are split apart along a direction derived from their indices.
fn add_repulsion(p: [f64; 2], q: [f64; 2], other_mass: f64, k: f64, i: usize, j: usize, out: &mut [f64; 2]) {
    let (mut dx, mut dy) = (p[0] - q[0], p[1] - q[1]);
    let mut d = (dx * dx + dy * dy).sqrt();
    if d < MIN_DISTANCE {
        let angle = ((i.wrapping_mul(31) ^ j.wrapping_mul(17)) % 360) as f64 * std::f64::consts::PI / 180.0;
        let sign = if i < j { 1.0 } else { -1.0 };
        dx = sign * angle.cos();
        dy = sign * angle.sin();
        d = MIN_DISTANCE;
        let f = k * other_mass / (d * d);
        out[0] += dx * f;
        out[1] += dy * f;
        return;
    }
    let f = k * other_mass / (d * d);
    out[0] += dx / d * f;
    out[1] += dy / d * f;
}

/// Runs `iterations` steps of repulsion between all items and springs along
/// `springs`, plus a pull towards the weighted centre that keeps loosely
/// connected items from drifting apart. Each step's displacement is capped by a temperature that decays
/// by the cooling factor.
pub fn simulate(
    bodies: &[Body],
    springs: &[Spring],
    mut pos: Vec<[f64; 2]>,
    iterations: u32,
    params: &LayoutParams,
) -> Vec<[f64; 2]> {
    let n = bodies.len();
    if n < 2 {
        return pos;
    }
    let mut cap = params.spring_rest_length * (n as f64).sqrt();
    let mut disp = vec![[0.0f64; 2]; n];
    for _ in 0..iterations {
        for d in disp.iter_mut() {
            *d = [0.0, 0.0];
        }
        if n > BARNES_HUT_THRESHOLD {
            let tree = QuadTree::build(&pos, bodies);
            for (i, d) in disp.iter_mut().enumerate() {
                tree.push(i, &pos, bodies, params.repulsion_constant, d);
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        add_repulsion(pos[i], pos[j], bodies[j].mass, params.repulsion_constant, i, j, &mut disp[i]);
                    }
                }
            }
        }
        for s in springs {
            if s.a == s.b {
                continue;
            }
            let (pa, pb) = (pos[s.a], pos[s.b]);
            let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
            let d = (dx * dx + dy * dy).sqrt().max(MIN_DISTANCE);
            let rest = params.spring_rest_length + bodies[s.a].radius + bodies[s.b].radius;
            let f = params.spring_constant * (d - rest) * (1.0 + s.weight).ln();
            let (ux, uy) = (dx / d * f, dy / d * f);
            disp[s.a][0] += ux / bodies[s.a].mass;
            disp[s.a][1] += uy / bodies[s.a].mass;
            disp[s.b][0] -= ux / bodies[s.b].mass;
            disp[s.b][1] -= uy / bodies[s.b].mass;
        }
        if params.gravity > 0.0 {
            let total: f64 = bodies.iter().map(|b| b.mass).sum();
            let mut c = [0.0, 0.0];
            for (p, b) in pos.iter().zip(bodies) {
                c[0] += p[0] * b.mass / total;
                c[1] += p[1] * b.mass / total;
            }
            for (d, p) in disp.iter_mut().zip(&pos) {
                d[0] += params.gravity * (c[0] - p[0]);
                d[1] += params.gravity * (c[1] - p[1]);
            }
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len > 0.0 && len.is_finite() {
                let scale = len.min(cap) / len;
                p[0] += d[0] * scale;
                p[1] += d[1] * scale;
            }
        }
        cap *= params.cooling_factor;
    }
    pos
}
