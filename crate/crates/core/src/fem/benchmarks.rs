//! The three plate problems: notched square in tension and in shear, and
//! the pin-loaded plate with holes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::material::PhaseFieldMaterial;
use super::mesh::Mesh;
use super::meshgen::{quadtree_mesh, HoledPlate, NotchedPlate, RefinementZone};
use super::simulation::{BoundaryCondition, Dof, LoadSchedule, Problem, RigidPin};
use super::solver::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkCase {
    SenTension,
    SenShear,
    HoledPlate,
}

impl BenchmarkCase {
    pub fn name(self) -> &'static str {
        match self {
            Self::SenTension => "sen_tension",
            Self::SenShear => "sen_shear",
            Self::HoledPlate => "holed_plate",
        }
    }
}

/// How much of the plate is resolved at the fine size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Only a narrow zone around the expected crack path.
    Coarse,
    /// A wider zone, giving element counts comparable to published meshes.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub case: BenchmarkCase,
    /// Phase-field length in mm.
    pub ell: f64,
    /// Fine element size is ℓ / `h_ratio`.
    pub h_ratio: f64,
    /// Upper bound for the coarse background cells, mm.
    pub coarse_size: f64,
    pub refinement: Refinement,
    pub notched: NotchedPlate,
    pub holed: HoledPlate,
    /// Final prescribed displacement in mm.
    pub max_displacement: f64,
    pub steps: usize,
    pub max_cutbacks: u32,
    /// Out-of-plane thickness in metres.
    pub thickness: f64,
    pub stop_below_peak: Option<f64>,
    /// Displacement before which the early stop is ignored, mm.
    pub stop_after: f64,
}

impl BenchmarkSpec {
    pub fn new(case: BenchmarkCase) -> Self {
        let (ell, max_displacement, steps, stop_after) = match case {
            BenchmarkCase::SenTension => (2.4, 0.15, 150, 0.0),
            BenchmarkCase::SenShear => (2.4, 0.4, 200, 0.0),
            BenchmarkCase::HoledPlate => (0.9, 1.2, 300, 0.0),
        };
        Self {
            case,
            ell,
            h_ratio: 7.0,
            coarse_size: 3.0,
            refinement: Refinement::Coarse,
            notched: NotchedPlate::default(),
            holed: HoledPlate::default(),
            max_displacement,
            steps,
            max_cutbacks: 4,
            thickness: 1.0,
            stop_below_peak: Some(0.02),
            stop_after,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell > 0.0) || !(self.h_ratio >= 1.0) || !(self.coarse_size > 0.0) {
            return Err(Error::domain(
                "benchmark needs l > 0, h_ratio >= 1 and a positive coarse size",
            ));
        }
        if self.steps == 0 || !(self.max_displacement != 0.0) || !(self.thickness > 0.0) {
            return Err(Error::domain(
                "benchmark needs steps > 0, a nonzero final displacement and thickness > 0",
            ));
        }
        Ok(())
    }

    pub fn fine_size(&self) -> f64 {
        self.ell / self.h_ratio
    }

    fn zones(&self) -> Vec<RefinementZone> {
        let h = self.fine_size();
        let l = self.ell;
        let wide = self.refinement == Refinement::Paper;
        match self.case {
            BenchmarkCase::SenTension => {
                let p = &self.notched;
                let half = if wide { 8.0 * l } else { 2.5 * l };
                let x0 = if wide { 0.0 } else { p.notch_length - 2.0 * l };
                vec![RefinementZone::Rect {
                    x0,
                    y0: p.notch_y - half,
                    x1: p.width,
                    y1: p.notch_y + half,
                    size: h,
                }]
            }
            BenchmarkCase::SenShear => {
                let p = &self.notched;
                // the crack leaves the tip downward and runs toward the bottom edge
                let pad = if wide { 3.0 * l } else { 1.5 * l };
                vec![RefinementZone::Rect {
                    x0: p.notch_length - pad,
                    y0: 0.0,
                    x1: p.width,
                    y1: p.notch_y + pad,
                    size: h,
                }]
            }
            BenchmarkCase::HoledPlate => {
                let p = &self.holed;
                let band = if wide { 3.0 * l } else { 2.0 * l };
                let tip = [p.notch_length, p.notch_y];
                let mut zones = Vec::new();
                if let Some(hole) = p.central_hole {
                    let c = hole.center;
                    let r = hole.radius;
                    // the first crack runs nearly straight, then bends down
                    // into the hole; the knee sits above its left shoulder
                    let knee = [c[0] - 1.25 * r, tip[1] - 0.1 * (tip[1] - c[1])];
                    let dx = knee[0] - c[0];
                    let dy = knee[1] - c[1];
                    let d = (dx * dx + dy * dy).sqrt();
                    let entry = [c[0] + r * dx / d, c[1] + r * dy / d];
                    let hw = band + 2.0 * l;
                    zones.push(RefinementZone::Band {
                        a: tip,
                        b: knee,
                        half_width: hw,
                        size: h,
                    });
                    zones.push(RefinementZone::Band {
                        a: knee,
                        b: entry,
                        half_width: hw,
                        size: h,
                    });
                    // second crack from the far side to the free edge
                    zones.push(RefinementZone::Band {
                        a: [c[0] + r, c[1]],
                        b: [p.width, c[1]],
                        half_width: hw,
                        size: h,
                    });
                } else {
                    zones.push(RefinementZone::Band {
                        a: tip,
                        b: [p.width, tip[1]],
                        half_width: band,
                        size: h,
                    });
                }
                zones
            }
        }
    }

    pub fn mesh(&self) -> Result<Mesh> {
        self.validate()?;
        let h = self.fine_size();
        let spec = match self.case {
            BenchmarkCase::SenTension | BenchmarkCase::SenShear => {
                self.notched.spec(h, self.coarse_size, self.zones())
            }
            BenchmarkCase::HoledPlate => self.holed.spec(h, self.coarse_size, self.zones()),
        };
        let mut mesh = quadtree_mesh(&spec)?;
        if self.case == BenchmarkCase::HoledPlate {
            mesh.add_reference_node("pin0", self.holed.lower_pin);
            mesh.add_reference_node("pin1", self.holed.upper_pin);
        }
        Ok(mesh)
    }

    /// Boundary conditions and the node set whose reaction is recorded.
    pub fn boundary_conditions(&self) -> (Vec<BoundaryCondition>, String, Dof) {
        match self.case {
            BenchmarkCase::SenTension => (
                vec![
                    BoundaryCondition::fixed("bottom", Dof::Ux),
                    BoundaryCondition::fixed("bottom", Dof::Uy),
                    BoundaryCondition::fixed("top", Dof::Ux),
                    BoundaryCondition::loaded("top", Dof::Uy, 1.0),
                ],
                "top".into(),
                Dof::Uy,
            ),
            BenchmarkCase::SenShear => (
                vec![
                    BoundaryCondition::fixed("bottom", Dof::Ux),
                    BoundaryCondition::fixed("bottom", Dof::Uy),
                    BoundaryCondition::fixed("left", Dof::Uy),
                    BoundaryCondition::fixed("right", Dof::Uy),
                    BoundaryCondition::fixed("top", Dof::Uy),
                    BoundaryCondition::loaded("top", Dof::Ux, 1.0),
                ],
                "top".into(),
                Dof::Ux,
            ),
            BenchmarkCase::HoledPlate => (
                vec![
                    BoundaryCondition::fixed("pin0", Dof::Ux),
                    BoundaryCondition::fixed("pin0", Dof::Uy),
                    BoundaryCondition::fixed("pin1", Dof::Ux),
                    BoundaryCondition::loaded("pin1", Dof::Uy, 1.0),
                ],
                "pin1".into(),
                Dof::Uy,
            ),
        }
    }

    /// Rigid pins in the two small holes (only for the holed plate).
    pub fn pins(&self) -> Vec<RigidPin> {
        match self.case {
            BenchmarkCase::HoledPlate => vec![
                RigidPin {
                    ring: "hole0".into(),
                    center: "pin0".into(),
                },
                RigidPin {
                    ring: "hole1".into(),
                    center: "pin1".into(),
                },
            ],
            _ => Vec::new(),
        }
    }

    pub fn problem(&self, material: PhaseFieldMaterial, solver: SolverOptions) -> Result<Problem> {
        let mesh = self.mesh()?;
        let (bcs, reaction_set, reaction_dof) = self.boundary_conditions();
        Ok(Problem {
            mesh,
            material: PhaseFieldMaterial {
                ell: self.ell,
                ..material
            },
            bcs,
            pins: self.pins(),
            reaction_set,
            reaction_dof,
            schedule: LoadSchedule {
                final_factor: self.max_displacement,
                steps: self.steps,
                max_cutbacks: self.max_cutbacks,
            },
            solver,
            thickness: self.thickness,
            stop_below_peak: self.stop_below_peak,
            stop_after: self.stop_after,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fine_band_respects_length_scale() {
        let spec = BenchmarkSpec::new(BenchmarkCase::SenTension);
        let m = spec.mesh().unwrap();
        let (lo, _) = m.edge_length_range(Some("finest"));
        let (_, hi) = m.edge_length_range(Some("finest"));
        assert!(hi <= 2.4 / 7.0 + 1e-12 && lo > 0.0);
    }

    #[test]
    fn holed_plate_sets_exist() {
        let spec = BenchmarkSpec {
            h_ratio: 3.0,
            ..BenchmarkSpec::new(BenchmarkCase::HoledPlate)
        };
        let m = spec.mesh().unwrap();
        for s in ["hole0", "hole1_upper", "hole2"] {
            assert!(!m.node_set(s).unwrap().is_empty(), "{s}");
        }
    }
}
