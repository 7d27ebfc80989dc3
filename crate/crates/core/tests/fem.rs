use std::collections::HashMap;

use cntfrac::fem::meshgen::{quadtree_mesh, QuadtreeSpec, RefinementZone};
use cntfrac::fem::{
    reaction_force, Assembler, BenchmarkCase, BenchmarkSpec, BoundaryCondition, Dof, DofMap,
    LoadSchedule, Mesh, PhaseFieldMaterial, Problem, Simulation, SolverOptions,
};

fn problem(mesh: Mesh, material: PhaseFieldMaterial, bcs: Vec<BoundaryCondition>) -> Problem {
    Problem {
        mesh,
        material,
        bcs,
        pins: Vec::new(),
        reaction_set: "top".into(),
        reaction_dof: Dof::Uy,
        schedule: LoadSchedule {
            final_factor: 1.0,
            steps: 1,
            max_cutbacks: 0,
        },
        solver: SolverOptions {
            rtol: 1e-11,
            ..SolverOptions::default()
        },
        thickness: 1.0,
        stop_below_peak: None,
        stop_after: 0.0,
    }
}

/// Practically unbreakable material, so the elastic response is undamaged.
fn elastic(e: f64, nu: f64) -> PhaseFieldMaterial {
    PhaseFieldMaterial::isotropic(e, nu, 1e12, 1.0, 0.0).unwrap()
}

fn graded_mesh() -> Mesh {
    quadtree_mesh(&QuadtreeSpec {
        x_breaks: vec![0.0, 4.0],
        y_breaks: vec![0.0, 4.0],
        base_size: 1.0,
        max_level: 2,
        zones: vec![RefinementZone::Rect {
            x0: 1.2,
            y0: 1.2,
            x1: 2.1,
            y1: 2.6,
            size: 0.25,
        }],
        slits: vec![],
        holes: vec![],
    })
    .unwrap()
}

#[test]
fn patch_test_on_graded_mesh_with_hanging_nodes() {
    let mut mesh = graded_mesh();
    assert!(
        !mesh.constraints.is_empty(),
        "mesh should have hanging nodes"
    );
    let field = |p: [f64; 2]| {
        [
            1e-3 * (0.3 + 2.0 * p[0] - 0.7 * p[1]),
            1e-3 * (-0.2 + 0.5 * p[0] + 1.5 * p[1]),
        ]
    };
    let boundary = mesh.select_nodes(|p| {
        p[0].abs() < 1e-9
            || p[1].abs() < 1e-9
            || (p[0] - 4.0).abs() < 1e-9
            || (p[1] - 4.0).abs() < 1e-9
    });
    let hanging = mesh.is_hanging();
    let mut bcs = Vec::new();
    for &n in boundary.iter().filter(|&&n| !hanging[n]) {
        let name = format!("n{n}");
        mesh.node_sets.insert(name.clone(), vec![n]);
        let u = field(mesh.nodes[n]);
        bcs.push(BoundaryCondition::loaded(&name, Dof::Ux, u[0]));
        bcs.push(BoundaryCondition::loaded(&name, Dof::Uy, u[1]));
    }
    let mut sim = Simulation::new(problem(mesh, elastic(3000.0, 0.3), bcs)).unwrap();
    sim.advance().unwrap();
    for (n, p) in sim.problem.mesh.nodes.iter().enumerate() {
        let u = field(*p);
        for c in 0..2 {
            let err = (sim.state.u[2 * n + c] - u[c]).abs();
            assert!(err < 1e-9, "node {n} at {p:?}: error {err}");
        }
    }
}

#[test]
fn tension_reactions_balance_and_follow_plane_strain_modulus() {
    let (w, h, e, nu, delta) = (4.0, 2.0, 2000.0, 0.3, 1e-3);
    let mut mesh = Mesh::rectangle(0.0, 0.0, w, h, 8, 4);
    mesh.node_sets.insert("corner".into(), vec![0]);
    let bcs = vec![
        BoundaryCondition::fixed("bottom", Dof::Uy),
        BoundaryCondition::fixed("corner", Dof::Ux),
        BoundaryCondition::loaded("top", Dof::Uy, delta),
    ];
    let mut sim = Simulation::new(problem(mesh, elastic(e, nu), bcs)).unwrap();
    let s = sim.advance().unwrap();
    let bottom = sim.problem.mesh.node_set("bottom").unwrap().to_vec();
    let f_bottom = reaction_force(
        &sim.assembler,
        &sim.problem.material,
        &sim.state,
        &bottom,
        Dof::Uy,
    );
    // uniaxial stress in plane strain: σ = E/(1-ν²) ε
    let sigma = e / (1.0 - nu * nu) * delta / h;
    let expected = sigma * w;
    assert!(
        (s.reaction - expected).abs() < 1e-8 * expected,
        "{} vs {expected}",
        s.reaction
    );
    assert!((s.reaction + f_bottom).abs() < 1e-8 * expected);
}

fn bar(strain: f64, steps: usize, k_res: f64) -> Simulation {
    let (e, gc, ell) = (1000.0, 1.0, 1.0);
    let p = Problem {
        schedule: LoadSchedule {
            final_factor: strain,
            steps,
            max_cutbacks: 4,
        },
        ..problem(
            Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 2, 2),
            PhaseFieldMaterial::isotropic(e, 0.0, gc, ell, k_res).unwrap(),
            vec![
                BoundaryCondition::fixed("bottom", Dof::Uy),
                BoundaryCondition::fixed("left", Dof::Ux),
                BoundaryCondition::fixed("right", Dof::Ux),
                BoundaryCondition::loaded("top", Dof::Uy, 1.0),
            ],
        )
    };
    Simulation::new(p).unwrap()
}

#[test]
fn homogeneous_damage_matches_closed_form() {
    for strain in [0.005, 0.02, 0.05] {
        let mut sim = bar(strain, 1, 0.0);
        sim.advance().unwrap();
        let psi = 0.5 * 1000.0 * strain * strain;
        let exact = 2.0 * psi / (1.0 + 2.0 * psi);
        for v in &sim.state.phi {
            assert!((v - exact).abs() < 1e-7, "strain {strain}: {v} vs {exact}");
        }
        let sigma = (1.0 - exact).powi(2) * 1000.0 * strain;
        let r = sim.reaction();
        assert!((r - sigma).abs() < 1e-6 * sigma, "{r} vs {sigma}");
    }
}

#[test]
fn homogeneous_strength_within_one_percent() {
    let eps_c = (1.0f64 / 3000.0).sqrt();
    let mut sim = bar(1.6 * eps_c, 80, 1e-6);
    sim.run(|_, _| Ok(())).unwrap();
    let peak = sim.curve.peak().unwrap();
    let exact = 9.0 / 16.0 * (1000.0f64 / 3.0).sqrt();
    assert!((peak.reaction - exact).abs() < 0.01 * exact);
    assert!((peak.applied - eps_c).abs() < 0.05 * eps_c);
    assert!(sim.diagnostics.history_monotone);
}

#[test]
fn exponential_profile_surface_energy() {
    for ratio in [7.0, 10.0] {
        let ell: f64 = 0.8;
        let h = ell / ratio;
        let half = 12.0 * ell;
        let n = (2.0 * half / h).round() as usize;
        let mesh = Mesh::rectangle(-half, 0.0, 2.0 * half, h, n, 1);
        let phi: Vec<f64> = mesh
            .nodes
            .iter()
            .map(|p| (-p[0].abs() / ell).exp())
            .collect();
        let asm = Assembler::new(&mesh, DofMap::new(&mesh, &[], &[]).unwrap()).unwrap();
        let mat = PhaseFieldMaterial::isotropic(1000.0, 0.3, 2.5, ell, 0.0).unwrap();
        let gamma = asm.surface_energy(&mat, &phi) / (mat.g_c * h);
        assert!((gamma - 1.0).abs() < 0.02, "h = l/{ratio}: {gamma}");
    }
}

#[test]
fn zero_load_leaves_everything_at_rest() {
    let mut p = problem(
        Mesh::rectangle(0.0, 0.0, 2.0, 1.0, 4, 2),
        PhaseFieldMaterial::isotropic(1000.0, 0.3, 1.0, 0.5, 1e-6).unwrap(),
        vec![
            BoundaryCondition::fixed("bottom", Dof::Ux),
            BoundaryCondition::fixed("bottom", Dof::Uy),
            BoundaryCondition::loaded("top", Dof::Uy, 1.0),
        ],
    );
    p.schedule.final_factor = 0.0;
    p.schedule.steps = 3;
    let mut sim = Simulation::new(p).unwrap();
    sim.run(|_, _| Ok(())).unwrap();
    assert_eq!(sim.curve.samples.len(), 3);
    assert!(sim.state.u.iter().all(|&v| v == 0.0));
    assert!(sim.state.phi.iter().all(|&v| v == 0.0));
    assert!(sim.curve.samples.iter().all(|s| s.reaction == 0.0));
}

#[test]
fn sen_tension_damage_is_mirror_symmetric() {
    let spec = BenchmarkSpec {
        h_ratio: 4.0,
        max_displacement: 0.06,
        steps: 12,
        ..BenchmarkSpec::new(BenchmarkCase::SenTension)
    };
    let mat = PhaseFieldMaterial::isotropic(3500.0, 0.27, 0.18, spec.ell, 1e-6).unwrap();
    let mut sim = Simulation::new(spec.problem(mat, SolverOptions::default()).unwrap()).unwrap();
    sim.run(|_, _| Ok(())).unwrap();
    let m = &sim.problem.mesh;
    let key = |p: [f64; 2]| ((p[0] * 1e6).round() as i64, (p[1] * 1e6).round() as i64);
    let index: HashMap<_, _> = m
        .nodes
        .iter()
        .enumerate()
        .map(|(i, p)| (key(*p), i))
        .collect();
    let yc = spec.notched.notch_y;
    let mut checked = 0;
    for (i, p) in m.nodes.iter().enumerate() {
        if let Some(&j) = index.get(&key([p[0], 2.0 * yc - p[1]])) {
            let (a, b) = (sim.state.phi[i], sim.state.phi[j]);
            assert!((a - b).abs() < 1e-4, "{p:?}: {a} vs {b}");
            checked += 1;
        }
    }
    assert!(checked > m.num_nodes() / 2);
    assert!(sim.diagnostics.phi_max > 0.1, "no damage developed");
}

#[test]
fn rigid_pins_move_as_rigid_bodies() {
    let spec = BenchmarkSpec {
        h_ratio: 2.0,
        max_displacement: 0.01,
        steps: 1,
        ..BenchmarkSpec::new(BenchmarkCase::HoledPlate)
    };
    let mat = PhaseFieldMaterial::isotropic(3500.0, 0.27, 1e9, spec.ell, 1e-6).unwrap();
    let mut sim = Simulation::new(spec.problem(mat, SolverOptions::default()).unwrap()).unwrap();
    let s = sim.advance().unwrap();
    assert!(s.reaction > 0.0);
    let m = &sim.problem.mesh;
    let u = &sim.state.u;
    for (ring, centre) in [("hole0", "pin0"), ("hole1", "pin1")] {
        let c = m.node_set(centre).unwrap()[0];
        let (cx, cy) = (m.nodes[c][0], m.nodes[c][1]);
        let nodes = m.node_set(ring).unwrap();
        // rotation from the node farthest along x
        let far = *nodes
            .iter()
            .max_by(|&&a, &&b| {
                (m.nodes[a][0] - cx)
                    .abs()
                    .total_cmp(&(m.nodes[b][0] - cx).abs())
            })
            .unwrap();
        let omega = (u[2 * far + 1] - u[2 * c + 1]) / (m.nodes[far][0] - cx);
        for &n in nodes {
            let (dx, dy) = (m.nodes[n][0] - cx, m.nodes[n][1] - cy);
            let ux = u[2 * c] - omega * dy;
            let uy = u[2 * c + 1] + omega * dx;
            assert!((u[2 * n] - ux).abs() < 1e-12 && (u[2 * n + 1] - uy).abs() < 1e-12);
        }
    }
    let top = m.node_set("pin1").unwrap()[0];
    assert!((u[2 * top + 1] - 0.01).abs() < 1e-15);
}
