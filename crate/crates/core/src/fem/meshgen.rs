//! Quadtree meshing of rectangles with refinement zones, slits and holes.
//!
//! Cells live on an index lattice. The base grid is uniform between the
//! user's break lines, so slits and other key lines always fall on cell
//! edges. Refinement is balanced 2:1; the resulting hanging nodes are
//! tied to their edge endpoints.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::element::shape_gradients;
use super::mesh::{HangingConstraint, Mesh};

/// Region whose cells must be at most `size` wide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RefinementZone {
    Rect {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        size: f64,
    },
    /// Points within `half_width` of the segment a–b.
    Band {
        a: [f64; 2],
        b: [f64; 2],
        half_width: f64,
        size: f64,
    },
    Ring {
        center: [f64; 2],
        r_inner: f64,
        r_outer: f64,
        size: f64,
    },
}

impl RefinementZone {
    fn size(&self) -> f64 {
        match *self {
            Self::Rect { size, .. } | Self::Band { size, .. } | Self::Ring { size, .. } => size,
        }
    }

    /// Conservative overlap test against an axis-aligned box.
    fn touches(&self, lo: [f64; 2], hi: [f64; 2]) -> bool {
        let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let half_diag = 0.5 * ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
        match *self {
            Self::Rect { x0, y0, x1, y1, .. } => {
                lo[0] < x1 && hi[0] > x0 && lo[1] < y1 && hi[1] > y0
            }
            Self::Band {
                a, b, half_width, ..
            } => segment_distance(c, a, b) <= half_width + half_diag,
            Self::Ring {
                center,
                r_inner,
                r_outer,
                ..
            } => {
                let d = ((c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2)).sqrt();
                d + half_diag >= r_inner && d - half_diag <= r_outer
            }
        }
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Horizontal traction-free cut along y from `x0` to `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub y: f64,
    pub x0: f64,
    pub x1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Hole {
    fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2)
            < self.radius * self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadtreeSpec {
    /// Vertical break lines including both domain edges.
    pub x_breaks: Vec<f64>,
    /// Horizontal break lines including both domain edges.
    pub y_breaks: Vec<f64>,
    /// Largest base cell edge.
    pub base_size: f64,
    pub max_level: u8,
    pub zones: Vec<RefinementZone>,
    pub slits: Vec<Slit>,
    pub holes: Vec<Hole>,
}

type Cell = (u8, u32, u32);
type NodeKey = (u32, u32, bool);

fn base_lines(breaks: &[f64], size: f64) -> Result<Vec<f64>> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Mesh(format!(
            "break lines {breaks:?} must be strictly increasing"
        )));
    }
    let mut lines = vec![breaks[0]];
    for w in breaks.windows(2) {
        let n = ((w[1] - w[0]) / size - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n {
            lines.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
    }
    Ok(lines)
}

struct Lattice {
    xs: Vec<f64>,
    ys: Vec<f64>,
    levels: u8,
}

impl Lattice {
    fn coord(lines: &[f64], i: u32, levels: u8) -> f64 {
        let base = (i >> levels) as usize;
        let frac = (i & ((1u32 << levels) - 1)) as f64 / (1u32 << levels) as f64;
        if base + 1 >= lines.len() {
            lines[lines.len() - 1]
        } else {
            lines[base] + frac * (lines[base + 1] - lines[base])
        }
    }

    fn point(&self, ix: u32, iy: u32) -> [f64; 2] {
        [
            Self::coord(&self.xs, ix, self.levels),
            Self::coord(&self.ys, iy, self.levels),
        ]
    }

    fn span(&self, c: Cell) -> (u32, u32, u32) {
        let s = 1u32 << (self.levels - c.0);
        (c.1 * s, c.2 * s, s)
    }

    fn bounds(&self, c: Cell) -> ([f64; 2], [f64; 2]) {
        let (ix, iy, s) = self.span(c);
        (self.point(ix, iy), self.point(ix + s, iy + s))
    }

    fn line_index(lines: &[f64], v: f64, levels: u8) -> Option<u32> {
        let tol = 1e-9 * (lines[lines.len() - 1] - lines[0]).abs().max(1.0);
        lines
            .iter()
            .position(|&x| (x - v).abs() <= tol)
            .map(|k| (k as u32) << levels)
    }
}

fn refine_cell(leaves: &mut HashSet<Cell>, c: Cell) {
    leaves.remove(&c);
    let (l, i, j) = c;
    for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        leaves.insert((l + 1, 2 * i + di, 2 * j + dj));
    }
}

/// Builds the quadtree mesh. Node sets `bottom`, `top`, `left`, `right`,
/// `slit{k}_upper`, `slit{k}_lower`, `hole{k}`, `hole{k}_upper` and
/// `hole{k}_lower` are attached, plus the element set `finest`.
pub fn quadtree_mesh(spec: &QuadtreeSpec) -> Result<Mesh> {
    if !(spec.base_size > 0.0) || spec.max_level > 12 {
        return Err(Error::Mesh(
            "base size must be positive and at most 12 refinement levels".into(),
        ));
    }
    for z in &spec.zones {
        if !(z.size() > 0.0) {
            return Err(Error::Mesh("refinement zone size must be positive".into()));
        }
    }
    let levels = spec.max_level;
    let lat = Lattice {
        xs: base_lines(&spec.x_breaks, spec.base_size)?,
        ys: base_lines(&spec.y_breaks, spec.base_size)?,
        levels,
    };
    let nx = (lat.xs.len() - 1) as u32;
    let ny = (lat.ys.len() - 1) as u32;
    let (xmin, xmax) = (lat.xs[0], lat.xs[nx as usize]);
    let (ymin, ymax) = (lat.ys[0], lat.ys[ny as usize]);

    // slit lattice rows and duplicated column range
    let mut slit_rows: Vec<(u32, u32, u32)> = Vec::new();
    for s in &spec.slits {
        let row = Lattice::line_index(&lat.ys, s.y, levels)
            .ok_or_else(|| Error::Mesh(format!("slit line y={} is not a break line", s.y)))?;
        let a = Lattice::line_index(&lat.xs, s.x0.min(s.x1), levels)
            .ok_or_else(|| Error::Mesh(format!("slit end x={} is not a break line", s.x0)))?;
        let b = Lattice::line_index(&lat.xs, s.x0.max(s.x1), levels)
            .ok_or_else(|| Error::Mesh(format!("slit end x={} is not a break line", s.x1)))?;
        slit_rows.push((row, a, b));
    }
    let x_last = nx << levels;
    let split_side = |ix: u32, iy: u32, below: bool| -> bool {
        below
            && slit_rows.iter().any(|&(row, a, b)| {
                iy == row && ((ix > a && ix < b) || (ix == a && a == 0) || (ix == b && b == x_last))
            })
    };

    let inside_hole = |p: [f64; 2]| spec.holes.iter().any(|h| h.contains(p));

    // refinement
    let mut leaves: HashSet<Cell> = HashSet::new();
    let mut stack: Vec<Cell> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            stack.push((0, i, j));
        }
    }
    while let Some(c) = stack.pop() {
        let (lo, hi) = lat.bounds(c);
        let size = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let buried = spec.holes.iter().any(|h| {
            [lo, hi, [lo[0], hi[1]], [hi[0], lo[1]]]
                .iter()
                .all(|&p| h.contains(p))
        });
        let wants = !buried
            && c.0 < levels
            && spec
                .zones
                .iter()
                .any(|z| size > z.size() * (1.0 + 1e-9) && z.touches(lo, hi));
        if wants {
            let (l, i, j) = c;
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                stack.push((l + 1, 2 * i + di, 2 * j + dj));
            }
        } else {
            leaves.insert(c);
        }
    }

    // 2:1 balance across edges
    loop {
        let mut to_refine: HashSet<Cell> = HashSet::new();
        for &(l, i, j) in &leaves {
            if l < 2 {
                continue;
            }
            let (cx, cy) = (nx << l, ny << l);
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let ni = i as i64 + di;
                let nj = j as i64 + dj;
                if ni < 0 || nj < 0 || ni >= cx as i64 || nj >= cy as i64 {
                    continue;
                }
                for k in (0..=l).rev() {
                    let key = (k, (ni as u32) >> (l - k), (nj as u32) >> (l - k));
                    if leaves.contains(&key) {
                        if k + 1 < l {
                            to_refine.insert(key);
                        }
                        break;
                    }
                }
            }
        }
        if to_refine.is_empty() {
            break;
        }
        for c in to_refine {
            refine_cell(&mut leaves, c);
        }
    }

    // drop cells inside holes
    let mut kept: Vec<Cell> = Vec::new();
    let mut removed: Vec<Cell> = Vec::new();
    for &c in &leaves {
        let (lo, hi) = lat.bounds(c);
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        if inside_hole(mid) {
            removed.push(c);
        } else {
            kept.push(c);
        }
    }
    // deterministic ordering: row-major by lower-left lattice point
    let order_key = |c: &Cell| {
        let (ix, iy, s) = lat.span(*c);
        (iy, ix, s)
    };
    kept.sort_by_key(order_key);
    if kept.is_empty() {
        return Err(Error::Mesh("every cell was removed".into()));
    }

    // nodes
    let mut ids: HashMap<NodeKey, usize> = HashMap::new();
    let mut keys: Vec<NodeKey> = Vec::new();
    let mut elements = Vec::with_capacity(kept.len());
    let mut finest_level = 0u8;
    for &c in &kept {
        let (ix, iy, s) = lat.span(c);
        let corners = [
            (ix, iy, false),
            (ix + s, iy, false),
            (ix + s, iy + s, true),
            (ix, iy + s, true),
        ];
        let mut conn = [0usize; 4];
        for (k, &(px, py, cell_below)) in corners.iter().enumerate() {
            // a corner on the slit row takes the lower copy if the cell lies below it
            let key = (px, py, split_side(px, py, cell_below));
            let next = keys.len();
            let id = *ids.entry(key).or_insert(next);
            if id == next {
                keys.push(key);
            }
            conn[k] = id;
        }
        finest_level = finest_level.max(c.0);
        elements.push(conn);
    }

    // hanging nodes
    let mut hanging: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &c in &kept {
        let (ix, iy, s) = lat.span(c);
        if s < 2 {
            continue;
        }
        let h = s / 2;
        // (midpoint, endpoint a, endpoint b); the flag says the cell lies below that point
        let edges = [
            ((ix + h, iy, false), (ix, iy, false), (ix + s, iy, false)),
            (
                (ix + s, iy + h, false),
                (ix + s, iy, false),
                (ix + s, iy + s, true),
            ),
            (
                (ix + h, iy + s, true),
                (ix, iy + s, true),
                (ix + s, iy + s, true),
            ),
            ((ix, iy + h, false), (ix, iy, false), (ix, iy + s, true)),
        ];
        let key = |p: (u32, u32, bool)| (p.0, p.1, split_side(p.0, p.1, p.2));
        for (m, a, b) in edges {
            if let Some(&mid) = ids.get(&key(m)) {
                let (ka, kb) = (key(a), key(b));
                let (Some(&na), Some(&nb)) = (ids.get(&ka), ids.get(&kb)) else {
                    return Err(Error::Mesh("hanging node without edge endpoints".into()));
                };
                hanging.insert(mid, vec![(na, 0.5), (nb, 0.5)]);
            }
        }
    }
    // resolve chains
    let mut constraints = Vec::with_capacity(hanging.len());
    for (&node, masters) in &hanging {
        let mut terms = masters.clone();
        for _ in 0..64 {
            if !terms.iter().any(|(m, _)| hanging.contains_key(m)) {
                break;
            }
            let mut next: Vec<(usize, f64)> = Vec::new();
            for (m, w) in terms {
                match hanging.get(&m) {
                    Some(sub) => next.extend(sub.iter().map(|&(mm, ww)| (mm, w * ww))),
                    None => next.push((m, w)),
                }
            }
            terms = next;
        }
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (m, w) in terms {
            *merged.entry(m).or_insert(0.0) += w;
        }
        constraints.push(HangingConstraint {
            node,
            masters: merged.into_iter().collect(),
        });
    }

    let mut nodes: Vec<[f64; 2]> = keys.iter().map(|k| lat.point(k.0, k.1)).collect();
    let mut mesh = Mesh {
        nodes: Vec::new(),
        elements,
        constraints,
        ..Default::default()
    };

    // hole boundaries: nodes shared between kept and removed cells
    let hanging_flags: HashSet<usize> = hanging.keys().copied().collect();
    for (hidx, hole) in spec.holes.iter().enumerate() {
        let mut boundary: HashSet<usize> = HashSet::new();
        for &c in &removed {
            let (lo, hi) = lat.bounds(c);
            let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
            if !hole.contains(mid) {
                continue;
            }
            let (ix, iy, s) = lat.span(c);
            for (px, py) in [(ix, iy), (ix + s, iy), (ix + s, iy + s), (ix, iy + s)] {
                for side in [false, true] {
                    if let Some(&id) = ids.get(&(px, py, side)) {
                        if !hanging_flags.contains(&id) {
                            boundary.insert(id);
                        }
                    }
                }
            }
        }
        let original = nodes.clone();
        for &id in &boundary {
            let p = nodes[id];
            let d = [p[0] - hole.center[0], p[1] - hole.center[1]];
            let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if r > 0.0 {
                nodes[id] = [
                    hole.center[0] + hole.radius * d[0] / r,
                    hole.center[1] + hole.radius * d[1] / r,
                ];
            }
        }
        // undo projections that fold an element
        for _ in 0..8 {
            let mut bad = false;
            for conn in &mesh.elements {
                let xy = conn.map(|v| nodes[v]);
                let folded = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                    .iter()
                    .any(|&(a, b)| shape_gradients(&xy, a, b).1 <= 0.0);
                if folded {
                    for &v in conn {
                        if nodes[v] != original[v] {
                            nodes[v] = original[v];
                            bad = true;
                        }
                    }
                }
            }
            if !bad {
                break;
            }
        }
        let mut all: Vec<usize> = boundary.into_iter().collect();
        all.sort_unstable();
        let upper: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&v| nodes[v][1] >= hole.center[1])
            .collect();
        let lower: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&v| nodes[v][1] <= hole.center[1])
            .collect();
        mesh.node_sets.insert(format!("hole{hidx}"), all);
        mesh.node_sets.insert(format!("hole{hidx}_upper"), upper);
        mesh.node_sets.insert(format!("hole{hidx}_lower"), lower);
    }

    let tol = 1e-9 * (xmax - xmin).max(ymax - ymin);
    let select = |f: &dyn Fn([f64; 2]) -> bool| -> Vec<usize> {
        (0..nodes.len()).filter(|&n| f(nodes[n])).collect()
    };
    mesh.node_sets
        .insert("bottom".into(), select(&|p| (p[1] - ymin).abs() < tol));
    mesh.node_sets
        .insert("top".into(), select(&|p| (p[1] - ymax).abs() < tol));
    mesh.node_sets
        .insert("left".into(), select(&|p| (p[0] - xmin).abs() < tol));
    mesh.node_sets
        .insert("right".into(), select(&|p| (p[0] - xmax).abs() < tol));
    for (k, &(row, a, b)) in slit_rows.iter().enumerate() {
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for (id, key) in keys.iter().enumerate() {
            if key.1 == row && key.0 >= a && key.0 <= b {
                if key.2 {
                    lower.push(id);
                } else {
                    upper.push(id);
                }
            }
        }
        mesh.node_sets.insert(format!("slit{k}_upper"), upper);
        mesh.node_sets.insert(format!("slit{k}_lower"), lower);
    }
    mesh.element_sets.insert(
        "finest".into(),
        kept.iter()
            .enumerate()
            .filter(|(_, c)| c.0 == finest_level)
            .map(|(e, _)| e)
            .collect(),
    );
    mesh.nodes = nodes;
    mesh.validate()?;
    Ok(mesh)
}

/// Single-edge-notched square: notch along y = `notch_y` from the left edge
/// to `notch_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotchedPlate {
    pub width: f64,
    pub height: f64,
    pub notch_length: f64,
    pub notch_y: f64,
}

impl Default for NotchedPlate {
    fn default() -> Self {
        Self {
            width: 50.0,
            height: 50.0,
            notch_length: 25.0,
            notch_y: 25.0,
        }
    }
}

/// Base cell edge and level count so that refined cells are at most `fine`.
pub fn level_plan(fine: f64, coarse_target: f64) -> (f64, u8) {
    let mut levels = 0u8;
    while fine * f64::from(1u32 << (levels + 1)) <= coarse_target * 1.0001 && levels < 10 {
        levels += 1;
    }
    (fine * f64::from(1u32 << levels), levels)
}

impl NotchedPlate {
    pub fn spec(&self, fine: f64, coarse: f64, zones: Vec<RefinementZone>) -> QuadtreeSpec {
        let (base, levels) = level_plan(fine, coarse);
        QuadtreeSpec {
            x_breaks: vec![0.0, self.notch_length, self.width],
            y_breaks: vec![0.0, self.notch_y, self.height],
            base_size: base,
            max_level: levels,
            zones,
            slits: vec![Slit {
                y: self.notch_y,
                x0: 0.0,
                x1: self.notch_length,
            }],
            holes: vec![],
        }
    }
}

/// Plate with two loading pin holes, a central hole and an edge notch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoledPlate {
    pub width: f64,
    pub height: f64,
    pub pin_radius: f64,
    pub lower_pin: [f64; 2],
    pub upper_pin: [f64; 2],
    pub central_hole: Option<Hole>,
    pub notch_y: f64,
    pub notch_length: f64,
}

impl Default for HoledPlate {
    fn default() -> Self {
        Self {
            width: 65.0,
            height: 120.0,
            pin_radius: 5.0,
            lower_pin: [20.0, 20.0],
            upper_pin: [20.0, 100.0],
            central_hole: Some(Hole {
                center: [36.5, 51.0],
                radius: 10.0,
            }),
            notch_y: 65.0,
            notch_length: 10.0,
        }
    }
}

impl HoledPlate {
    /// Holes are numbered lower pin, upper pin, then the central hole.
    pub fn spec(&self, fine: f64, coarse: f64, mut zones: Vec<RefinementZone>) -> QuadtreeSpec {
        let (base, levels) = level_plan(fine, coarse);
        let mut holes = vec![
            Hole {
                center: self.lower_pin,
                radius: self.pin_radius,
            },
            Hole {
                center: self.upper_pin,
                radius: self.pin_radius,
            },
        ];
        holes.extend(self.central_hole);
        // keep hole outlines reasonably round
        for h in &holes {
            zones.push(RefinementZone::Ring {
                center: h.center,
                r_inner: 0.85 * h.radius,
                r_outer: 1.15 * h.radius,
                size: (h.radius / 8.0).max(fine),
            });
        }
        QuadtreeSpec {
            x_breaks: vec![0.0, self.notch_length, self.width],
            y_breaks: vec![0.0, self.notch_y, self.height],
            base_size: base,
            max_level: levels,
            zones,
            slits: vec![Slit {
                y: self.notch_y,
                x0: 0.0,
                x1: self.notch_length,
            }],
            holes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(mesh: &Mesh) -> f64 {
        mesh.elements
            .iter()
            .map(|c| {
                let mut a = 0.0;
                for k in 0..4 {
                    let (p, q) = (mesh.nodes[c[k]], mesh.nodes[c[(k + 1) % 4]]);
                    a += 0.5 * (p[0] * q[1] - q[0] * p[1]);
                }
                a
            })
            .sum()
    }

    #[test]
    fn uniform_grid_without_zones() {
        let spec = QuadtreeSpec {
            x_breaks: vec![0.0, 4.0],
            y_breaks: vec![0.0, 2.0],
            base_size: 1.0,
            max_level: 3,
            zones: vec![],
            slits: vec![],
            holes: vec![],
        };
        let m = quadtree_mesh(&spec).unwrap();
        assert_eq!(m.num_elements(), 8);
        assert_eq!(m.num_nodes(), 15);
        assert!(m.constraints.is_empty());
    }

    #[test]
    fn refined_zone_is_balanced_and_constrained() {
        let spec = QuadtreeSpec {
            x_breaks: vec![0.0, 8.0],
            y_breaks: vec![0.0, 8.0],
            base_size: 2.0,
            max_level: 4,
            zones: vec![RefinementZone::Rect {
                x0: 3.9,
                y0: 3.9,
                x1: 4.1,
                y1: 4.1,
                size: 0.125,
            }],
            slits: vec![],
            holes: vec![],
        };
        let m = quadtree_mesh(&spec).unwrap();
        assert!((area(&m) - 64.0).abs() < 1e-9);
        assert!(!m.constraints.is_empty());
        let (lo, hi) = m.edge_length_range(None);
        assert!((lo - 0.125).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        // every hanging node sits at the weighted position of its masters
        for c in &m.constraints {
            let mut p = [0.0; 2];
            for &(n, w) in &c.masters {
                p[0] += w * m.nodes[n][0];
                p[1] += w * m.nodes[n][1];
            }
            let q = m.nodes[c.node];
            assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn slit_duplicates_nodes() {
        let plate = NotchedPlate {
            width: 4.0,
            height: 4.0,
            notch_length: 2.0,
            notch_y: 2.0,
        };
        let m = quadtree_mesh(&plate.spec(0.5, 0.5, vec![])).unwrap();
        let up = m.node_set("slit0_upper").unwrap();
        let lo = m.node_set("slit0_lower").unwrap();
        // x = 0, 0.5, 1, 1.5 duplicated; the tip (x = 2) is shared and on the upper list
        assert_eq!(lo.len(), 4);
        assert_eq!(up.len(), 5);
        for &a in lo {
            assert!(up.iter().any(|&b| b != a && m.nodes[b] == m.nodes[a]));
        }
    }

    #[test]
    fn holes_are_cut_and_rounded() {
        let plate = HoledPlate::default();
        let m = quadtree_mesh(&plate.spec(1.0, 4.0, vec![])).unwrap();
        let hole_area = 2.0 * std::f64::consts::PI * 25.0 + std::f64::consts::PI * 100.0;
        let rel = (area(&m) - (65.0 * 120.0 - hole_area)).abs() / hole_area;
        assert!(rel < 0.03, "{rel}");
        for &v in m.node_set("hole1_upper").unwrap() {
            let p = m.nodes[v];
            let r = ((p[0] - 20.0).powi(2) + (p[1] - 100.0).powi(2)).sqrt();
            assert!((r - 5.0).abs() < 0.7);
            assert!(p[1] >= 100.0);
        }
    }
}
