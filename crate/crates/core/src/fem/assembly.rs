//! Degree-of-freedom bookkeeping and element loops.
//!
//! Unknowns are the displacement and phase-field values at nodes that are
//! neither hanging nor prescribed. Residuals and block tangents are
//! assembled directly in that reduced numbering.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::element::{element_gauss_points, GaussPoint};
use super::linear::SparsePattern;
use super::material::{element_energy_density, PhaseFieldMaterial};
use super::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Free(usize),
    Prescribed,
    Dependent,
}

/// Linear tie of one displacement dof to others: u[dof] = Σ w·u[master].
/// Masters must be free or prescribed.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLink {
    pub dof: usize,
    pub masters: Vec<(usize, f64)>,
}

/// Reduced numbering of the displacement and phase-field unknowns.
#[derive(Debug, Clone)]
pub struct DofMap {
    u_slots: Vec<Slot>,
    phi_slots: Vec<Slot>,
    /// Reduced index → full dof.
    pub u_free: Vec<usize>,
    pub phi_free: Vec<usize>,
    /// Prescribed displacement dofs.
    pub u_prescribed: Vec<usize>,
    masters: BTreeMap<usize, Vec<(usize, f64)>>,
    links: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl DofMap {
    /// `prescribed` lists full displacement dofs (2·node + component).
    /// Prescriptions on hanging nodes are dropped; such nodes follow their
    /// masters. Reference nodes carry no phase field.
    pub fn new(mesh: &Mesh, prescribed: &[usize], links: &[DofLink]) -> Result<Self> {
        let n = mesh.num_nodes();
        let mut masters = BTreeMap::new();
        for c in &mesh.constraints {
            masters.insert(c.node, c.masters.clone());
        }
        let mut u_slots = vec![Slot::Free(0); 2 * n];
        let mut phi_slots = vec![Slot::Free(0); n];
        for &node in masters.keys() {
            u_slots[2 * node] = Slot::Dependent;
            u_slots[2 * node + 1] = Slot::Dependent;
            phi_slots[node] = Slot::Dependent;
        }
        for &r in &mesh.reference_nodes {
            phi_slots[r] = Slot::Prescribed;
        }
        let mut u_prescribed = Vec::new();
        for &d in prescribed {
            if d >= 2 * n {
                return Err(Error::Mesh(format!("prescribed dof {d} out of range")));
            }
            if u_slots[d] != Slot::Dependent && u_slots[d] != Slot::Prescribed {
                u_slots[d] = Slot::Prescribed;
                u_prescribed.push(d);
            }
        }
        let mut link_map = BTreeMap::new();
        for l in links {
            if l.dof >= 2 * n || l.masters.iter().any(|m| m.0 >= 2 * n) {
                return Err(Error::Mesh(format!(
                    "link on dof {} references a missing dof",
                    l.dof
                )));
            }
            if u_slots[l.dof] != Slot::Free(0) || link_map.contains_key(&l.dof) {
                return Err(Error::Mesh(format!(
                    "dof {} is linked but already constrained",
                    l.dof
                )));
            }
            link_map.insert(l.dof, l.masters.clone());
        }
        for (&d, ms) in &link_map {
            if ms
                .iter()
                .any(|&(m, _)| u_slots[m] == Slot::Dependent || link_map.contains_key(&m))
            {
                return Err(Error::Mesh(format!(
                    "link on dof {d} has a dependent master"
                )));
            }
        }
        for &d in link_map.keys() {
            u_slots[d] = Slot::Dependent;
        }
        let mut u_free = Vec::new();
        for (d, s) in u_slots.iter_mut().enumerate() {
            if let Slot::Free(_) = s {
                *s = Slot::Free(u_free.len());
                u_free.push(d);
            }
        }
        let mut phi_free = Vec::new();
        for (d, s) in phi_slots.iter_mut().enumerate() {
            if let Slot::Free(_) = s {
                *s = Slot::Free(phi_free.len());
                phi_free.push(d);
            }
        }
        Ok(Self {
            u_slots,
            phi_slots,
            u_free,
            phi_free,
            u_prescribed,
            masters,
            links: link_map,
        })
    }

    pub fn n_u(&self) -> usize {
        self.u_free.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_free.len()
    }

    fn dof_masters(&self, dof: usize) -> Vec<(usize, f64)> {
        match self.links.get(&dof) {
            Some(ms) => ms.clone(),
            None => {
                let (node, comp) = (dof / 2, dof % 2);
                self.masters[&node]
                    .iter()
                    .map(|&(m, w)| (2 * m + comp, w))
                    .collect()
            }
        }
    }

    fn u_terms(&self, dof: usize) -> Vec<(usize, f64)> {
        match self.u_slots[dof] {
            Slot::Free(i) => vec![(i, 1.0)],
            Slot::Prescribed => vec![],
            Slot::Dependent => {
                // hanging masters may themselves be linked, never deeper
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for (m, w) in self.dof_masters(dof) {
                    for (i, wi) in self.u_terms(m) {
                        *acc.entry(i).or_default() += w * wi;
                    }
                }
                acc.into_iter().collect()
            }
        }
    }

    fn phi_terms(&self, node: usize) -> Vec<(usize, f64)> {
        match self.phi_slots[node] {
            Slot::Free(i) => vec![(i, 1.0)],
            Slot::Prescribed => vec![],
            Slot::Dependent => self.masters[&node]
                .iter()
                .filter_map(|&(m, w)| match self.phi_slots[m] {
                    Slot::Free(i) => Some((i, w)),
                    _ => None,
                })
                .collect(),
        }
    }

    /// Writes the reduced unknowns into full nodal vectors and refreshes
    /// the dependent values. Prescribed entries are left untouched.
    pub fn scatter(&self, xu: &[f64], xphi: &[f64], u: &mut [f64], phi: &mut [f64]) {
        for (i, &d) in self.u_free.iter().enumerate() {
            u[d] = xu[i];
        }
        for (i, &d) in self.phi_free.iter().enumerate() {
            phi[d] = xphi[i];
        }
        self.update_dependent(u, phi);
    }

    pub fn update_dependent(&self, u: &mut [f64], phi: &mut [f64]) {
        for (&d, ms) in &self.links {
            u[d] = ms.iter().map(|&(m, w)| w * u[m]).sum();
        }
        for (&node, ms) in &self.masters {
            let mut v = [0.0; 3];
            for &(m, w) in ms {
                v[0] += w * u[2 * m];
                v[1] += w * u[2 * m + 1];
                v[2] += w * phi[m];
            }
            u[2 * node] = v[0];
            u[2 * node + 1] = v[1];
            phi[node] = v[2];
        }
    }

    pub fn gather(&self, u: &[f64], phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            self.u_free.iter().map(|&d| u[d]).collect(),
            self.phi_free.iter().map(|&d| phi[d]).collect(),
        )
    }

    /// Moves nodal forces on dependent dofs onto their masters.
    pub fn condense_forces(&self, f: &mut [f64]) {
        for (&node, ms) in &self.masters {
            for comp in 0..2 {
                let v = std::mem::take(&mut f[2 * node + comp]);
                for &(m, w) in ms {
                    f[2 * m + comp] += w * v;
                }
            }
        }
        for (&d, ms) in &self.links {
            let v = std::mem::take(&mut f[d]);
            for &(m, w) in ms {
                f[m] += w * v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Contribution {
    pos: u32,
    a: u8,
    b: u8,
    w: f64,
}

#[derive(Debug, Clone)]
struct BlockLayout {
    pattern: SparsePattern,
    /// Per element local dof → (reduced index, weight) terms.
    terms: Vec<Vec<Vec<(usize, f64)>>>,
    contributions: Vec<Vec<Contribution>>,
}

impl BlockLayout {
    fn build(n: usize, terms: Vec<Vec<Vec<(usize, f64)>>>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for el in &terms {
            let mut idx: Vec<usize> = el.iter().flatten().map(|t| t.0).collect();
            idx.sort_unstable();
            idx.dedup();
            for (k, &c) in idx.iter().enumerate() {
                for &r in &idx[k..] {
                    pairs.push((c, r));
                }
            }
        }
        // keep every diagonal so isolated unknowns still factorise
        pairs.extend((0..n).map(|i| (i, i)));
        let pattern = SparsePattern::from_lower_pairs(n, pairs)?;
        let mut contributions = Vec::with_capacity(terms.len());
        for el in &terms {
            let mut list = Vec::new();
            for (a, ta) in el.iter().enumerate() {
                for (b, tb) in el.iter().enumerate() {
                    for &(r, wr) in ta {
                        for &(c, wc) in tb {
                            if r >= c {
                                let pos = pattern
                                    .position(r, c)
                                    .expect("pattern covers element pairs");
                                list.push(Contribution {
                                    pos: pos as u32,
                                    a: a as u8,
                                    b: b as u8,
                                    w: wr * wc,
                                });
                            }
                        }
                    }
                }
            }
            contributions.push(list);
        }
        Ok(Self {
            pattern,
            terms,
            contributions,
        })
    }
}

/// What an evaluation should produce besides the residual.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalRequest {
    pub tangent: bool,
    pub full_force: bool,
    pub energies: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Evaluation {
    pub r_u: Vec<f64>,
    pub r_phi: Vec<f64>,
    /// Σ|element contributions| per reduced unknown.
    pub scale_u: Vec<f64>,
    pub scale_phi: Vec<f64>,
    pub k_uu: Vec<f64>,
    pub k_phiphi: Vec<f64>,
    /// Internal force on every displacement dof, hanging dofs condensed.
    pub f_full: Vec<f64>,
    /// Effective history max(H_old, ψ) per integration point.
    pub h_eff: Vec<f64>,
    pub elastic_energy: f64,
    pub fracture_energy: f64,
}

/// Element data and block layouts for one mesh and constraint set.
#[derive(Debug, Clone)]
pub struct Assembler {
    pub gauss: Vec<[GaussPoint; 4]>,
    pub conn: Vec<[usize; 4]>,
    pub dofs: DofMap,
    u_layout: BlockLayout,
    phi_layout: BlockLayout,
    pub min_area: f64,
    pub min_edge: f64,
}

impl Assembler {
    pub fn new(mesh: &Mesh, dofs: DofMap) -> Result<Self> {
        mesh.validate()?;
        let gauss: Vec<[GaussPoint; 4]> = mesh
            .elements
            .iter()
            .map(|c| element_gauss_points(&c.map(|v| mesh.nodes[v])))
            .collect();
        let mut u_terms = Vec::with_capacity(mesh.num_elements());
        let mut phi_terms = Vec::with_capacity(mesh.num_elements());
        for c in &mesh.elements {
            let mut tu = Vec::with_capacity(8);
            for &v in c {
                tu.push(dofs.u_terms(2 * v));
                tu.push(dofs.u_terms(2 * v + 1));
            }
            u_terms.push(tu);
            phi_terms.push(c.iter().map(|&v| dofs.phi_terms(v)).collect());
        }
        let u_layout = BlockLayout::build(dofs.n_u(), u_terms)?;
        let phi_layout = BlockLayout::build(dofs.n_phi(), phi_terms)?;
        let min_area = gauss
            .iter()
            .map(|g| g.iter().map(|p| p.dv).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let (min_edge, _) = mesh.edge_length_range(None);
        Ok(Self {
            gauss,
            conn: mesh.elements.clone(),
            dofs,
            u_layout,
            phi_layout,
            min_area,
            min_edge,
        })
    }

    pub fn u_pattern(&self) -> &SparsePattern {
        &self.u_layout.pattern
    }

    pub fn phi_pattern(&self) -> &SparsePattern {
        &self.phi_layout.pattern
    }

    pub fn num_gauss_points(&self) -> usize {
        4 * self.gauss.len()
    }

    /// Residuals (and optionally block tangents) at the full nodal state.
    pub fn evaluate(
        &self,
        mat: &PhaseFieldMaterial,
        u: &[f64],
        phi: &[f64],
        h_old: &[f64],
        req: EvalRequest,
    ) -> Evaluation {
        let mut ev = Evaluation {
            r_u: vec![0.0; self.dofs.n_u()],
            r_phi: vec![0.0; self.dofs.n_phi()],
            scale_u: vec![0.0; self.dofs.n_u()],
            scale_phi: vec![0.0; self.dofs.n_phi()],
            h_eff: vec![0.0; h_old.len()],
            ..Default::default()
        };
        if req.tangent {
            ev.k_uu = vec![0.0; self.u_layout.pattern.nnz()];
            ev.k_phiphi = vec![0.0; self.phi_layout.pattern.nnz()];
        }
        if req.full_force {
            ev.f_full = vec![0.0; u.len()];
        }
        let (gc, ell) = (mat.g_c, mat.ell);
        for (e, conn) in self.conn.iter().enumerate() {
            let mut ue = [0.0; 8];
            let mut pe = [0.0; 4];
            for (k, &v) in conn.iter().enumerate() {
                ue[2 * k] = u[2 * v];
                ue[2 * k + 1] = u[2 * v + 1];
                pe[k] = phi[v];
            }
            let mut fu = [0.0; 8];
            let mut fp = [0.0; 4];
            let mut kuu = [[0.0; 8]; 8];
            let mut kpp = [[0.0; 4]; 4];
            for (g, gp) in self.gauss[e].iter().enumerate() {
                let eps = gp.strain(&ue);
                let sig = mat.stress(&eps);
                let psi = element_energy_density(mat, &eps);
                let h = h_old[4 * e + g].max(psi);
                ev.h_eff[4 * e + g] = h;
                let phig = gp.value(&pe);
                let deg = mat.degradation(phig);
                let gphi = gp.gradient(&pe);
                for k in 0..4 {
                    let bs = gp.bt_sigma(k, &sig);
                    fu[2 * k] += deg * gp.dv * bs[0];
                    fu[2 * k + 1] += deg * gp.dv * bs[1];
                    let grad_term = gc * ell * (gp.grad[k][0] * gphi[0] + gp.grad[k][1] * gphi[1]);
                    // lumped zeroth-order terms use the nodal value
                    let local = (gc / ell) * pe[k] - 2.0 * (1.0 - pe[k]) * h;
                    fp[k] += gp.dv * (grad_term + gp.n[k] * local);
                }
                if req.tangent {
                    let cols: [[f64; 3]; 8] = std::array::from_fn(|a| gp.b_columns(a / 2)[a % 2]);
                    let ccols: [[f64; 3]; 8] = std::array::from_fn(|a| mat.stress(&cols[a]));
                    let f = deg * gp.dv;
                    for a in 0..8 {
                        for b in 0..8 {
                            kuu[a][b] += f
                                * (cols[a][0] * ccols[b][0]
                                    + cols[a][1] * ccols[b][1]
                                    + cols[a][2] * ccols[b][2]);
                        }
                    }
                    for a in 0..4 {
                        for b in 0..4 {
                            kpp[a][b] += gp.dv
                                * gc
                                * ell
                                * (gp.grad[a][0] * gp.grad[b][0] + gp.grad[a][1] * gp.grad[b][1]);
                        }
                        kpp[a][a] += gp.dv * gp.n[a] * (gc / ell + 2.0 * h);
                    }
                }
                if req.energies {
                    ev.elastic_energy += gp.dv * deg * psi;
                    ev.fracture_energy += gp.dv
                        * gc
                        * (phig * phig / (2.0 * ell)
                            + 0.5 * ell * (gphi[0] * gphi[0] + gphi[1] * gphi[1]));
                }
            }
            for (a, terms) in self.u_layout.terms[e].iter().enumerate() {
                for &(i, w) in terms {
                    ev.r_u[i] += w * fu[a];
                    ev.scale_u[i] += (w * fu[a]).abs();
                }
            }
            for (a, terms) in self.phi_layout.terms[e].iter().enumerate() {
                for &(i, w) in terms {
                    ev.r_phi[i] += w * fp[a];
                    ev.scale_phi[i] += (w * fp[a]).abs();
                }
            }
            if req.tangent {
                for c in &self.u_layout.contributions[e] {
                    ev.k_uu[c.pos as usize] += c.w * kuu[c.a as usize][c.b as usize];
                }
                for c in &self.phi_layout.contributions[e] {
                    ev.k_phiphi[c.pos as usize] += c.w * kpp[c.a as usize][c.b as usize];
                }
            }
            if req.full_force {
                for (k, &v) in conn.iter().enumerate() {
                    ev.f_full[2 * v] += fu[2 * k];
                    ev.f_full[2 * v + 1] += fu[2 * k + 1];
                }
            }
        }
        if req.full_force {
            self.dofs.condense_forces(&mut ev.f_full);
        }
        ev
    }

    /// Regularised crack surface ∫ G_c (φ²/2l + l|∇φ|²/2) for a nodal field.
    pub fn surface_energy(&self, mat: &PhaseFieldMaterial, phi: &[f64]) -> f64 {
        let mut total = 0.0;
        for (e, conn) in self.conn.iter().enumerate() {
            let pe = conn.map(|v| phi[v]);
            for gp in &self.gauss[e] {
                let p = gp.value(&pe);
                let g = gp.gradient(&pe);
                total += gp.dv
                    * mat.g_c
                    * (p * p / (2.0 * mat.ell) + 0.5 * mat.ell * (g[0] * g[0] + g[1] * g[1]));
            }
        }
        total
    }
}
