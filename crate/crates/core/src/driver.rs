//! Workflows behind the command-line front end: effective properties,
//! fracture energy, parameter sweeps and plate simulations, each writing
//! CSV (and VTK) into an output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Dispersion, RunConfig};
use crate::error::{Error, Result};
use crate::fem::{
    vtk, LoadCurve, PhaseFieldMaterial, RunDiagnostics, Simulation, SimulationResult,
};
use crate::fracture::{total_fracture_energy, FractureEnergy, PackingTable};
use crate::homogenize::{
    double_inclusion_effective, isotropic_projection, two_step_effective, AgglomerationParams,
};
use crate::tensor::{Odf3d, StiffnessTensor};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Full double precision: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comment lines opening every result file.
pub fn provenance(cfg: &RunConfig, what: &str) -> String {
    format!(
        "# cntfrac {VERSION} {what}\n# config_sha256 {}\n",
        cfg.hash()
    )
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Effective elastic response and toughness of one composite state.
#[derive(Debug, Clone)]
pub struct CompositeProperties {
    pub dispersion: Dispersion,
    pub stiffness: StiffnessTensor,
    /// Pa.
    pub e: f64,
    pub nu: f64,
    /// Relative distance of the stiffness from its isotropic projection.
    pub anisotropy: f64,
    pub fracture: FractureEnergy,
}

pub fn composite_properties(
    cfg: &RunConfig,
    dispersion: Dispersion,
) -> Result<CompositeProperties> {
    let geom = cfg.geometry()?;
    let phases = cfg.phases();
    let agg = AgglomerationParams::new(cfg.agglomeration.chi, cfg.agglomeration.zeta)?;
    let stiffness = match dispersion {
        Dispersion::Uniform => double_inclusion_effective(&phases, &geom, &Odf3d::Uniform)?,
        Dispersion::Agglomerated => two_step_effective(&phases, &geom, &agg, &Odf3d::Uniform)?,
    };
    let (e, nu, anisotropy) = isotropic_projection(&stiffness);
    let zeta = match dispersion {
        Dispersion::Uniform => 0.0,
        Dispersion::Agglomerated => agg.zeta,
    };
    let fracture = total_fracture_energy(
        &cfg.fracture_params()?,
        &cfg.odf()?,
        &AgglomerationParams { zeta, ..agg },
        &cfg.bundle_statistics()?,
        &PackingTable::default(),
    )?;
    Ok(CompositeProperties {
        dispersion,
        stiffness,
        e,
        nu,
        anisotropy,
        fracture,
    })
}

fn dispersion_name(d: Dispersion) -> &'static str {
    match d {
        Dispersion::Uniform => "uniform",
        Dispersion::Agglomerated => "agglomerated",
    }
}

/// Writes `homogenize.csv` with both dispersions.
pub fn run_homogenize(cfg: &RunConfig, out: &Path) -> Result<Vec<CompositeProperties>> {
    prepare(out)?;
    let props = [Dispersion::Uniform, Dispersion::Agglomerated]
        .into_iter()
        .map(|d| composite_properties(cfg, d))
        .collect::<Result<Vec<_>>>()?;
    let mut s = provenance(cfg, "homogenize");
    s.push_str("dispersion,f_cnt,E_eff_Pa,nu_eff,anisotropy");
    for (i, j) in [
        (0, 0),
        (0, 1),
        (0, 2),
        (1, 1),
        (1, 2),
        (2, 2),
        (3, 3),
        (4, 4),
        (5, 5),
    ] {
        let _ = write!(s, ",C{}{}_Pa", i + 1, j + 1);
    }
    s.push('\n');
    for p in &props {
        let m = p.stiffness.matrix();
        let _ = write!(
            s,
            "{},{},{},{},{}",
            dispersion_name(p.dispersion),
            fmt17(cfg.composite.f_cnt),
            fmt17(p.e),
            fmt17(p.nu),
            fmt17(p.anisotropy)
        );
        for (i, j) in [
            (0, 0),
            (0, 1),
            (0, 2),
            (1, 1),
            (1, 2),
            (2, 2),
            (3, 3),
            (4, 4),
            (5, 5),
        ] {
            let _ = write!(s, ",{}", fmt17(m[(i, j)]));
        }
        s.push('\n');
    }
    write_file(&out.join("homogenize.csv"), &s)?;
    Ok(props)
}

/// Writes `fracture_energy.csv` with both dispersions.
pub fn run_fracture_energy(cfg: &RunConfig, out: &Path) -> Result<Vec<CompositeProperties>> {
    prepare(out)?;
    let props = [Dispersion::Uniform, Dispersion::Agglomerated]
        .into_iter()
        .map(|d| composite_properties(cfg, d))
        .collect::<Result<Vec<_>>>()?;
    let mut s = provenance(cfg, "fracture-energy");
    s.push_str("dispersion,f_cnt,G_0,G_PF,G_PF_agg,zeta,G_c\n");
    for p in &props {
        let f = &p.fracture;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            dispersion_name(p.dispersion),
            fmt17(cfg.composite.f_cnt),
            fmt17(f.g0),
            fmt17(f.g_pf),
            fmt17(f.g_pf_agg),
            fmt17(f.zeta),
            fmt17(f.g_c)
        );
    }
    write_file(&out.join("fracture_energy.csv"), &s)?;
    Ok(props)
}

/// One evaluated (or failed) sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub series: Option<f64>,
    pub value: f64,
    pub outcome: std::result::Result<CompositeProperties, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub parameter: String,
    pub series: Option<String>,
    pub points: Vec<SweepPoint>,
}

/// Evaluates the configured sweep in parallel; rows keep axis order and
/// failures become error rows.
pub fn sweep(cfg: &RunConfig) -> SweepResult {
    let s = &cfg.sweep;
    let series: Vec<Option<f64>> = if s.series.is_empty() {
        vec![None]
    } else {
        s.series_values.iter().map(|&v| Some(v)).collect()
    };
    let grid: Vec<(Option<f64>, f64)> = series
        .iter()
        .flat_map(|&a| cfg.sweep_values().into_iter().map(move |v| (a, v)))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(a, v)| {
            let point = || -> Result<CompositeProperties> {
                let base = match a {
                    Some(x) => cfg.with_value(&s.series, x)?,
                    None => cfg.clone(),
                };
                let c = base.with_value(&s.parameter, v)?;
                composite_properties(&c, c.composite.dispersion)
            };
            SweepPoint {
                series: a,
                value: v,
                outcome: point().map_err(|e| e.to_string()),
            }
        })
        .collect();
    SweepResult {
        parameter: s.parameter.clone(),
        series: (!s.series.is_empty()).then(|| s.series.clone()),
        points,
    }
}

pub fn sweep_csv(cfg: &RunConfig, r: &SweepResult) -> String {
    let mut s = provenance(cfg, "sweep");
    if let Some(name) = &r.series {
        let _ = write!(s, "{name},");
    }
    let _ = writeln!(
        s,
        "{},E_eff_Pa,nu_eff,G_c,G_PF,G_PF_agg,status",
        r.parameter
    );
    for p in &r.points {
        if let Some(a) = p.series {
            let _ = write!(s, "{},", fmt17(a));
        }
        match &p.outcome {
            Ok(c) => {
                let f = &c.fracture;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},ok",
                    fmt17(p.value),
                    fmt17(c.e),
                    fmt17(c.nu),
                    fmt17(f.g_c),
                    fmt17(f.g_pf),
                    fmt17(f.g_pf_agg)
                );
            }
            Err(msg) => {
                let clean = msg.replace([',', '\n', '"'], " ");
                let _ = writeln!(s, "{},,,,,,error: {clean}", fmt17(p.value));
            }
        }
    }
    s
}

/// Writes `sweep.csv`.
pub fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepResult> {
    prepare(out)?;
    let r = sweep(cfg);
    write_file(&out.join("sweep.csv"), &sweep_csv(cfg, &r))?;
    Ok(r)
}

/// Outcome of a plate simulation.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub properties: CompositeProperties,
    pub material: PhaseFieldMaterial,
    pub num_elements: usize,
    pub num_nodes: usize,
    pub result: SimulationResult,
    pub files: Vec<PathBuf>,
}

pub fn load_curve_csv(cfg: &RunConfig, curve: &LoadCurve) -> String {
    let mut s = provenance(cfg, "simulate");
    s.push_str("step,applied_displacement_mm,reaction_kN\n");
    for p in &curve.samples {
        let _ = writeln!(s, "{},{},{}", p.step, fmt17(p.applied), fmt17(p.reaction));
    }
    s
}

fn steps_csv(cfg: &RunConfig, curve: &LoadCurve) -> String {
    let mut s = provenance(cfg, "simulate");
    s.push_str("step,applied_displacement_mm,reaction_kN,iterations,elastic_energy_mJ,fracture_energy_mJ,phi_max\n");
    for p in &curve.samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.step,
            fmt17(p.applied),
            fmt17(p.reaction),
            p.iterations,
            fmt17(p.elastic_energy),
            fmt17(p.fracture_energy),
            fmt17(p.phi_max)
        );
    }
    s
}

fn summary_text(
    cfg: &RunConfig,
    props: &CompositeProperties,
    mat: &PhaseFieldMaterial,
    curve: &LoadCurve,
    diag: &RunDiagnostics,
    mesh: (usize, usize),
    failure: Option<&Error>,
) -> String {
    let mut s = provenance(cfg, "simulate");
    let b = cfg.benchmark();
    let _ = writeln!(s, "case = \"{}\"", b.case.name());
    let _ = writeln!(s, "dispersion = \"{}\"", dispersion_name(props.dispersion));
    let _ = writeln!(s, "elements = {}\nnodes = {}", mesh.0, mesh.1);
    let _ = writeln!(
        s,
        "E_eff_Pa = {}\nnu_eff = {}\nG_c = {}",
        fmt17(props.e),
        fmt17(props.nu),
        fmt17(props.fracture.g_c)
    );
    let _ = writeln!(
        s,
        "ell_mm = {}\nfine_size_mm = {}",
        fmt17(mat.ell),
        fmt17(b.fine_size())
    );
    if let Some(p) = curve.peak() {
        let _ = writeln!(
            s,
            "peak_reaction_kN = {}\npeak_displacement_mm = {}",
            fmt17(p.reaction),
            fmt17(p.applied)
        );
    }
    let _ = writeln!(
        s,
        "phi_min = {}\nphi_max = {}",
        fmt17(diag.phi_min),
        fmt17(diag.phi_max)
    );
    let _ = writeln!(s, "history_monotone = {}", diag.history_monotone);
    let _ = writeln!(
        s,
        "total_iterations = {}\ncutbacks = {}",
        diag.total_iterations, diag.cutbacks
    );
    let status = failure
        .map(|e| e.to_string().replace('"', "'"))
        .unwrap_or_else(|| "completed".into());
    let _ = writeln!(s, "status = \"{status}\"");
    s
}

/// Runs the configured plate problem with the composite of the configured
/// dispersion. `observer` sees every converged increment. Results so far
/// are written even when a step fails.
pub fn simulate_with(
    cfg: &RunConfig,
    out: &Path,
    mut observer: impl FnMut(&Simulation, &crate::fem::LoadSample),
) -> Result<SimulationOutcome> {
    prepare(out)?;
    let props = composite_properties(cfg, cfg.composite.dispersion)?;
    let bench = cfg.benchmark();
    let material = PhaseFieldMaterial::from_si(
        &props.stiffness.symmetrized(),
        props.fracture.g_c,
        bench.ell,
        cfg.simulation.k_res,
    )?;
    let problem = bench.problem(material, cfg.solver)?;
    let mesh_counts = (problem.mesh.num_elements(), problem.mesh.num_nodes());
    let mut sim = Simulation::new(problem)?;
    let every = cfg.simulation.snapshot_every;
    let mut files = Vec::new();
    let run = sim.run(|sim, sample| {
        observer(sim, sample);
        if every > 0 && sample.step % every == 0 {
            let p = out.join(format!("state_{:05}.vtk", sample.step));
            vtk::write_vtk(&p, &sim.problem.mesh, &sim.state)?;
            files.push(p);
        }
        Ok(())
    });
    let failure = run.err();
    let curve_path = out.join("load_curve.csv");
    write_file(&curve_path, &load_curve_csv(cfg, &sim.curve))?;
    write_file(&out.join("steps.csv"), &steps_csv(cfg, &sim.curve))?;
    let final_path = out.join("state_final.vtk");
    vtk::write_vtk(&final_path, &sim.problem.mesh, &sim.state)?;
    write_file(
        &out.join("summary.toml"),
        &summary_text(
            cfg,
            &props,
            &sim.problem.material,
            &sim.curve,
            &sim.diagnostics,
            mesh_counts,
            failure.as_ref(),
        ),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    files.extend([
        curve_path,
        out.join("steps.csv"),
        final_path,
        out.join("summary.toml"),
    ]);
    Ok(SimulationOutcome {
        properties: props,
        material: sim.problem.material,
        num_elements: mesh_counts.0,
        num_nodes: mesh_counts.1,
        result: SimulationResult {
            curve: sim.curve.clone(),
            state: sim.state.clone(),
            diagnostics: sim.diagnostics,
        },
        files,
    })
}

pub fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulationOutcome> {
    simulate_with(cfg, out, |_, _| {})
}
