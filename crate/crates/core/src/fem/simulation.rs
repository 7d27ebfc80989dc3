//! Displacement-controlled phase-field fracture runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::assembly::{Assembler, DofLink, DofMap, EvalRequest};
use super::material::PhaseFieldMaterial;
use super::mesh::Mesh;
use super::solver::{FieldState, IncrementReport, QuasiNewton, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Ux,
    Uy,
}

impl Dof {
    pub fn component(self) -> usize {
        match self {
            Dof::Ux => 0,
            Dof::Uy => 1,
        }
    }
}

/// Prescribed displacement on every node of a set: `value` times the load
/// factor when `scaled`, otherwise constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub set: String,
    pub dof: Dof,
    pub value: f64,
    #[serde(default)]
    pub scaled: bool,
}

impl BoundaryCondition {
    pub fn fixed(set: &str, dof: Dof) -> Self {
        Self {
            set: set.into(),
            dof,
            value: 0.0,
            scaled: false,
        }
    }

    pub fn loaded(set: &str, dof: Dof, value: f64) -> Self {
        Self {
            set: set.into(),
            dof,
            value,
            scaled: true,
        }
    }
}

/// A rigid pin filling a hole: the ring nodes follow the translation of a
/// reference node plus a free rotation about it. The translation itself is
/// set through ordinary boundary conditions on the reference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidPin {
    pub ring: String,
    pub center: String,
}

/// Links tying the ring of `pin` to its reference node. The uy of the ring
/// node furthest from the centre in x carries the rotation.
pub fn rigid_pin_links(mesh: &Mesh, pin: &RigidPin) -> Result<Vec<DofLink>> {
    let center = match mesh.node_set(&pin.center)? {
        [c] => *c,
        other => {
            return Err(Error::Mesh(format!(
                "pin centre set `{}` has {} nodes",
                pin.center,
                other.len()
            )))
        }
    };
    let hanging = mesh.is_hanging();
    let ring: Vec<usize> = mesh
        .node_set(&pin.ring)?
        .iter()
        .copied()
        .filter(|&n| !hanging[n] && n != center)
        .collect();
    let c = mesh.nodes[center];
    let carrier = ring
        .iter()
        .copied()
        .max_by(|&a, &b| {
            (mesh.nodes[a][0] - c[0])
                .abs()
                .total_cmp(&(mesh.nodes[b][0] - c[0]).abs())
        })
        .ok_or_else(|| Error::Mesh(format!("pin ring `{}` is empty", pin.ring)))?;
    let arm = mesh.nodes[carrier][0] - c[0];
    if arm.abs() < 1e-12 {
        return Err(Error::Mesh(format!(
            "pin ring `{}` is degenerate",
            pin.ring
        )));
    }
    let (cx, cy, my) = (2 * center, 2 * center + 1, 2 * carrier + 1);
    let mut links = Vec::with_capacity(2 * ring.len());
    for &n in &ring {
        let j = (mesh.nodes[n][1] - c[1]) / arm;
        let k = (mesh.nodes[n][0] - c[0]) / arm;
        // u = U + θ ẑ×(x − c) with θ = (u_my − U_y) / arm
        links.push(DofLink {
            dof: 2 * n,
            masters: vec![(cx, 1.0), (cy, j), (my, -j)],
        });
        if n != carrier {
            links.push(DofLink {
                dof: 2 * n + 1,
                masters: vec![(cy, 1.0 - k), (my, k)],
            });
        }
    }
    Ok(links)
}

/// Uniform load increments from zero to the final load factor, with up to
/// `max_cutbacks` halvings of a failing increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadSchedule {
    pub final_factor: f64,
    pub steps: usize,
    pub max_cutbacks: u32,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub material: PhaseFieldMaterial,
    pub bcs: Vec<BoundaryCondition>,
    pub pins: Vec<RigidPin>,
    /// Node set and direction whose summed reaction is recorded.
    pub reaction_set: String,
    pub reaction_dof: Dof,
    pub schedule: LoadSchedule,
    pub solver: SolverOptions,
    /// Out-of-plane thickness in metres; reactions are reported in kN.
    pub thickness: f64,
    /// Stop once the reaction has fallen below this fraction of its peak.
    pub stop_below_peak: Option<f64>,
    /// Applied displacement before which the early stop is not considered.
    pub stop_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadSample {
    pub step: usize,
    /// Load factor (the prescribed displacement in mm for unit BC values).
    pub applied: f64,
    /// Reaction in kN for the problem thickness.
    pub reaction: f64,
    pub iterations: usize,
    pub elastic_energy: f64,
    pub fracture_energy: f64,
    pub phi_max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadCurve {
    pub samples: Vec<LoadSample>,
}

impl LoadCurve {
    /// Sample with the largest reaction.
    pub fn peak(&self) -> Option<LoadSample> {
        self.samples
            .iter()
            .copied()
            .max_by(|a, b| a.reaction.total_cmp(&b.reaction))
    }

    /// First applied load after the peak at which the reaction falls below
    /// `fraction` of the peak.
    pub fn drop_below(&self, fraction: f64) -> Option<f64> {
        let peak = self.peak()?;
        self.samples
            .iter()
            .filter(|s| s.applied > peak.applied)
            .find(|s| s.reaction < fraction * peak.reaction)
            .map(|s| s.applied)
    }
}

/// Extreme values seen over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub phi_min: f64,
    pub phi_max: f64,
    /// Every committed history value was at least its predecessor.
    pub history_monotone: bool,
    pub total_iterations: usize,
    pub cutbacks: usize,
}

impl Default for RunDiagnostics {
    fn default() -> Self {
        Self {
            phi_min: 0.0,
            phi_max: 0.0,
            history_monotone: true,
            total_iterations: 0,
            cutbacks: 0,
        }
    }
}

/// Summed internal force along `dof` over a node set (N per mm thickness).
pub fn reaction_force(
    asm: &Assembler,
    mat: &PhaseFieldMaterial,
    state: &FieldState,
    nodes: &[usize],
    dof: Dof,
) -> f64 {
    let ev = asm.evaluate(
        mat,
        &state.u,
        &state.phi,
        &state.history,
        EvalRequest {
            full_force: true,
            ..Default::default()
        },
    );
    nodes
        .iter()
        .map(|&n| ev.f_full[2 * n + dof.component()])
        .sum()
}

/// Stateful driver: mesh data, solver and the current fields.
pub struct Simulation {
    pub problem: Problem,
    pub assembler: Assembler,
    pub state: FieldState,
    pub curve: LoadCurve,
    pub diagnostics: RunDiagnostics,
    solver: QuasiNewton,
    /// (full dof, value per unit load factor, scaled)
    prescribed: Vec<(usize, f64, bool)>,
    reaction_nodes: Vec<usize>,
    factor: f64,
    step: usize,
}

impl Simulation {
    pub fn new(problem: Problem) -> Result<Self> {
        problem.material.validate()?;
        if problem.schedule.steps == 0 || !problem.schedule.final_factor.is_finite() {
            return Err(Error::domain(
                "load schedule needs at least one step and a finite final factor",
            ));
        }
        let hanging = problem.mesh.is_hanging();
        let mut by_dof: BTreeMap<usize, (f64, bool)> = BTreeMap::new();
        for bc in &problem.bcs {
            let nodes = problem.mesh.node_set(&bc.set)?;
            if nodes.is_empty() {
                return Err(Error::Mesh(format!("boundary set `{}` is empty", bc.set)));
            }
            for &n in nodes {
                if hanging[n] {
                    continue;
                }
                let d = 2 * n + bc.dof.component();
                if let Some(&(v, s)) = by_dof.get(&d) {
                    if v != bc.value || s != bc.scaled {
                        return Err(Error::Mesh(format!(
                            "conflicting prescriptions on node {n} from set `{}`",
                            bc.set
                        )));
                    }
                }
                by_dof.insert(d, (bc.value, bc.scaled));
            }
        }
        let prescribed: Vec<(usize, f64, bool)> =
            by_dof.iter().map(|(&d, &(v, s))| (d, v, s)).collect();
        let mut links = Vec::new();
        for pin in &problem.pins {
            links.extend(rigid_pin_links(&problem.mesh, pin)?);
        }
        if let Some(l) = links.iter().find(|l| by_dof.contains_key(&l.dof)) {
            return Err(Error::Mesh(format!(
                "dof {} is both prescribed and tied to a pin",
                l.dof
            )));
        }
        let dofs = DofMap::new(
            &problem.mesh,
            &prescribed.iter().map(|p| p.0).collect::<Vec<_>>(),
            &links,
        )?;
        let assembler = Assembler::new(&problem.mesh, dofs)?;
        let reaction_nodes: Vec<usize> = problem
            .mesh
            .node_set(&problem.reaction_set)?
            .iter()
            .copied()
            .filter(|&n| !hanging[n])
            .collect();
        let solver = QuasiNewton::new(&assembler, problem.solver);
        let state = FieldState::zeros(problem.mesh.num_nodes(), assembler.num_gauss_points());
        Ok(Self {
            problem,
            assembler,
            state,
            curve: LoadCurve::default(),
            diagnostics: RunDiagnostics::default(),
            solver,
            prescribed,
            reaction_nodes,
            factor: 0.0,
            step: 0,
        })
    }

    pub fn load_factor(&self) -> f64 {
        self.factor
    }

    fn apply_prescribed(&mut self, factor: f64) {
        for &(d, v, scaled) in &self.prescribed {
            self.state.u[d] = if scaled { v * factor } else { v };
        }
    }

    pub fn reaction(&self) -> f64 {
        reaction_force(
            &self.assembler,
            &self.problem.material,
            &self.state,
            &self.reaction_nodes,
            self.problem.reaction_dof,
        ) * self.problem.thickness
    }

    fn try_increment(&mut self, target: f64, depth: u32) -> Result<usize> {
        let saved = self.state.clone();
        let start = self.factor;
        self.apply_prescribed(target);
        match self.solver.solve(
            &self.assembler,
            &self.problem.material,
            &mut self.state,
            self.step,
        ) {
            Ok(IncrementReport { iterations, .. }) => {
                self.factor = target;
                Ok(iterations)
            }
            Err(e @ (Error::NonConvergence { .. } | Error::Linear(_))) => {
                self.state = saved;
                if depth >= self.problem.schedule.max_cutbacks {
                    return Err(e);
                }
                self.diagnostics.cutbacks += 1;
                let mid = 0.5 * (start + target);
                let a = self.try_increment(mid, depth + 1)?;
                let b = self.try_increment(target, depth + 1)?;
                Ok(a + b)
            }
            Err(e) => Err(e),
        }
    }

    /// Advances one scheduled increment and records a sample.
    pub fn advance(&mut self) -> Result<LoadSample> {
        let sched = self.problem.schedule;
        self.step += 1;
        let target = sched.final_factor * self.step as f64 / sched.steps as f64;
        let before = self.state.history.clone();
        let iterations = self.try_increment(target, 0)?;
        if self.state.history.iter().zip(&before).any(|(n, o)| n < o) {
            self.diagnostics.history_monotone = false;
        }
        let (lo, hi) = self
            .state
            .phi
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| {
                (a.min(p), b.max(p))
            });
        self.diagnostics.phi_min = self.diagnostics.phi_min.min(lo);
        self.diagnostics.phi_max = self.diagnostics.phi_max.max(hi);
        self.diagnostics.total_iterations += iterations;
        let ev = self.assembler.evaluate(
            &self.problem.material,
            &self.state.u,
            &self.state.phi,
            &self.state.history,
            EvalRequest {
                full_force: true,
                energies: true,
                ..Default::default()
            },
        );
        let reaction: f64 = self
            .reaction_nodes
            .iter()
            .map(|&n| ev.f_full[2 * n + self.problem.reaction_dof.component()])
            .sum::<f64>()
            * self.problem.thickness;
        let sample = LoadSample {
            step: self.step,
            applied: target,
            reaction,
            iterations,
            elastic_energy: ev.elastic_energy,
            fracture_energy: ev.fracture_energy,
            phi_max: hi,
        };
        self.curve.samples.push(sample);
        Ok(sample)
    }

    pub fn finished(&self) -> bool {
        if self.step >= self.problem.schedule.steps {
            return true;
        }
        match (
            self.problem.stop_below_peak,
            self.curve.peak(),
            self.curve.samples.last(),
        ) {
            (Some(frac), Some(peak), Some(last)) => {
                last.applied >= self.problem.stop_after
                    && last.applied > peak.applied
                    && last.reaction.abs() < frac * peak.reaction.abs()
            }
            _ => false,
        }
    }

    /// Runs to completion, calling `observer` after every increment.
    pub fn run(
        &mut self,
        mut observer: impl FnMut(&Simulation, &LoadSample) -> Result<()>,
    ) -> Result<&LoadCurve> {
        while !self.finished() {
            let s = self.advance()?;
            observer(self, &s)?;
        }
        Ok(&self.curve)
    }
}

/// Outcome of [`run_simulation`].
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub curve: LoadCurve,
    pub state: FieldState,
    pub diagnostics: RunDiagnostics,
}

pub fn run_simulation(problem: Problem) -> Result<SimulationResult> {
    let mut sim = Simulation::new(problem)?;
    sim.run(|_, _| Ok(()))?;
    Ok(SimulationResult {
        curve: sim.curve.clone(),
        state: sim.state.clone(),
        diagnostics: sim.diagnostics,
    })
}
