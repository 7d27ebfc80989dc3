//! Coarse single-edge-notched tension plate: prints the load curve as it
//! runs and leaves VTK snapshots in a temporary directory.

use cntfrac::config::RunConfig;
use cntfrac::driver::simulate_with;

fn main() -> cntfrac::Result<()> {
    let cfg = RunConfig::from_toml_str(
        "[composite]\nf_cnt = 0.01\n\n\
         [simulation]\ncase = \"sen_tension\"\nh_ratio = 3\n\
         max_displacement = 0.12\nsteps = 60\nsnapshot_every = 10\n",
        &[],
    )?;
    let out = std::env::temp_dir().join("cntfrac_sen_tension");
    let r = simulate_with(&cfg, &out, |_, s| {
        println!(
            "{:4} u = {:.4} mm  F = {:8.3} kN",
            s.step, s.applied, s.reaction
        );
    })?;
    let peak = r.result.curve.peak().expect("at least one step");
    println!(
        "{} elements, G_c = {:.1} J/m^2, peak {:.2} kN at {:.3} mm; output in {}",
        r.num_elements,
        r.properties.fracture.g_c,
        peak.reaction,
        peak.applied,
        out.display()
    );
    Ok(())
}
