//! Legacy ASCII VTK output of nodal fields.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::mesh::Mesh;
use super::solver::FieldState;

pub fn vtk_string(mesh: &Mesh, state: &FieldState) -> String {
    let n = mesh.num_nodes();
    let ne = mesh.num_elements();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# vtk DataFile Version 3.0\nphase-field state\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(s, "POINTS {n} double");
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {ne} {}", 5 * ne);
    for c in &mesh.elements {
        let _ = writeln!(s, "4 {} {} {} {}", c[0], c[1], c[2], c[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("9\n");
    }
    let _ = writeln!(
        s,
        "CELL_DATA {ne}\nSCALARS history double 1\nLOOKUP_TABLE default"
    );
    for e in 0..ne {
        let h = state
            .history
            .get(4 * e..4 * e + 4)
            .map(|v| v.iter().sum::<f64>() / 4.0)
            .unwrap_or(0.0);
        let _ = writeln!(s, "{h}");
    }
    let _ = writeln!(
        s,
        "POINT_DATA {n}\nSCALARS phi double 1\nLOOKUP_TABLE default"
    );
    for v in &state.phi {
        let _ = writeln!(s, "{v}");
    }
    let _ = writeln!(s, "VECTORS u double");
    for k in 0..n {
        let _ = writeln!(s, "{} {} 0", state.u[2 * k], state.u[2 * k + 1]);
    }
    s
}

pub fn write_vtk(path: &Path, mesh: &Mesh, state: &FieldState) -> Result<()> {
    std::fs::write(path, vtk_string(mesh, state)).map_err(|e| Error::io(path, e))
}
