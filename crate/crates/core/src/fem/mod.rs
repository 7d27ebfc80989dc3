//! Plane-strain AT2 phase-field fracture on bilinear quadrilaterals.

pub mod assembly;
pub mod benchmarks;
pub mod element;
pub mod linear;
pub mod material;
pub mod mesh;
pub mod meshgen;
pub mod simulation;
pub mod solver;
pub mod vtk;

pub use assembly::{Assembler, DofLink, DofMap, EvalRequest, Evaluation};
pub use benchmarks::{BenchmarkCase, BenchmarkSpec, Refinement};
pub use material::{
    element_energy_density, plane_strain_reduce, update_history, PhaseFieldMaterial,
};
pub use mesh::{HangingConstraint, Mesh};
pub use meshgen::{
    quadtree_mesh, Hole, HoledPlate, NotchedPlate, QuadtreeSpec, RefinementZone, Slit,
};
pub use simulation::{
    reaction_force, rigid_pin_links, run_simulation, BoundaryCondition, Dof, LoadCurve, LoadSample,
    LoadSchedule, Problem, RigidPin, RunDiagnostics, Simulation, SimulationResult,
};
pub use solver::{FieldState, IncrementReport, QuasiNewton, SolverOptions};
