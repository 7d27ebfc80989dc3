use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::element::shape_gradients;

/// Nodal dependency for a hanging node: its values are the weighted sum of
/// the master node values.
#[derive(Debug, Clone, PartialEq)]
pub struct HangingConstraint {
    pub node: usize,
    pub masters: Vec<(usize, f64)>,
}

/// Bilinear quadrilateral mesh in millimetres.
#[derive(Debug, Clone, Default)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counter-clockwise corner nodes.
    pub elements: Vec<[usize; 4]>,
    pub constraints: Vec<HangingConstraint>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub element_sets: BTreeMap<String, Vec<usize>>,
    /// Nodes outside every element, used as anchors for rigid links.
    pub reference_nodes: Vec<usize>,
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Mesh(format!("unknown node set `{name}`")))
    }

    /// Structured nx × ny grid over [x0, x0+w] × [y0, y0+h] with the usual
    /// `bottom`, `top`, `left`, `right` node sets.
    pub fn rectangle(x0: f64, y0: f64, w: f64, h: f64, nx: usize, ny: usize) -> Self {
        let mut mesh = Mesh::default();
        for j in 0..=ny {
            for i in 0..=nx {
                mesh.nodes
                    .push([x0 + w * i as f64 / nx as f64, y0 + h * j as f64 / ny as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        for j in 0..ny {
            for i in 0..nx {
                mesh.elements
                    .push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        mesh.node_sets
            .insert("bottom".into(), (0..=nx).map(|i| id(i, 0)).collect());
        mesh.node_sets
            .insert("top".into(), (0..=nx).map(|i| id(i, ny)).collect());
        mesh.node_sets
            .insert("left".into(), (0..=ny).map(|j| id(0, j)).collect());
        mesh.node_sets
            .insert("right".into(), (0..=ny).map(|j| id(nx, j)).collect());
        mesh
    }

    /// Appends a node that belongs to no element and registers it as the
    /// single-node set `name`.
    pub fn add_reference_node(&mut self, name: &str, at: [f64; 2]) -> usize {
        let id = self.nodes.len();
        self.nodes.push(at);
        self.reference_nodes.push(id);
        self.node_sets.insert(name.into(), vec![id]);
        id
    }

    /// Nodes whose coordinates satisfy `pred`.
    pub fn select_nodes(&self, pred: impl Fn([f64; 2]) -> bool) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&n| pred(self.nodes[n]))
            .collect()
    }

    pub fn is_hanging(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nodes.len()];
        for c in &self.constraints {
            flags[c.node] = true;
        }
        flags
    }

    /// Checks connectivity, orientation and constraint consistency.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut used = vec![false; n];
        for (e, conn) in self.elements.iter().enumerate() {
            for &v in conn {
                if v >= n {
                    return Err(Error::Mesh(format!(
                        "element {e} references node {v} of {n}"
                    )));
                }
                used[v] = true;
            }
            let xy = conn.map(|v| self.nodes[v]);
            for (xi, eta) in super::element::GAUSS_2X2 {
                let (_, det) = shape_gradients(&xy, xi, eta);
                if !(det > 0.0) {
                    return Err(Error::Mesh(format!(
                        "element {e} has non-positive Jacobian {det:e}"
                    )));
                }
            }
        }
        for &r in &self.reference_nodes {
            if r >= n || used[r] {
                return Err(Error::Mesh(format!(
                    "reference node {r} is missing or attached to an element"
                )));
            }
            used[r] = true;
        }
        if let Some(orphan) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!("node {orphan} belongs to no element")));
        }
        let hanging = self.is_hanging();
        for c in &self.constraints {
            if self
                .reference_nodes
                .iter()
                .any(|&r| r == c.node || c.masters.iter().any(|m| m.0 == r))
            {
                return Err(Error::Mesh(format!(
                    "hanging node {} involves a reference node",
                    c.node
                )));
            }
            let total: f64 = c.masters.iter().map(|m| m.1).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Mesh(format!(
                    "hanging node {} weights sum to {total}",
                    c.node
                )));
            }
            if c.masters.iter().any(|&(m, _)| hanging[m] || m == c.node) {
                return Err(Error::Mesh(format!(
                    "hanging node {} has an unresolved master",
                    c.node
                )));
            }
        }
        for (name, set) in &self.node_sets {
            if set.iter().any(|&v| v >= n) {
                return Err(Error::Mesh(format!(
                    "node set `{name}` references a missing node"
                )));
            }
        }
        Ok(())
    }

    /// Smallest and largest element edge lengths within an element set (or
    /// all elements).
    pub fn edge_length_range(&self, set: Option<&str>) -> (f64, f64) {
        let ids: Vec<usize> = match set.and_then(|s| self.element_sets.get(s)) {
            Some(v) => v.clone(),
            None => (0..self.elements.len()).collect(),
        };
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for e in ids {
            let c = self.elements[e];
            for k in 0..4 {
                let a = self.nodes[c[k]];
                let b = self.nodes[c[(k + 1) % 4]];
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                lo = lo.min(len);
                hi = hi.max(len);
            }
        }
        (lo, hi)
    }

    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        let c = self.elements[e];
        let mut x = [0.0; 2];
        for &v in &c {
            x[0] += 0.25 * self.nodes[v][0];
            x[1] += 0.25 * self.nodes[v][1];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_is_valid() {
        let m = Mesh::rectangle(0.0, 0.0, 2.0, 1.0, 4, 2);
        m.validate().unwrap();
        assert_eq!(m.num_elements(), 8);
        assert_eq!(m.node_set("top").unwrap().len(), 5);
        assert!(m.node_set("nope").is_err());
    }

    #[test]
    fn clockwise_element_rejected() {
        let mut m = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 1, 1);
        m.elements[0].reverse();
        assert!(m.validate().is_err());
    }
}
