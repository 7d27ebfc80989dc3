//! Bridging contribution to the fracture energy as the tubes get longer.
//! The maximum sits where the embedded length stops pulling out and starts
//! breaking tubes. Past it the rupture work of long tubes slowly climbs back.

use cntfrac::config::RunConfig;
use cntfrac::fracture::{fracture_energy_uniform, FractureParams};
use cntfrac::homogenize::FillerGeometry;

fn main() -> cntfrac::Result<()> {
    let cfg = RunConfig::default().with_value("composite.f_cnt", 0.01)?;
    let base = cfg.fracture_params()?;
    let odf = cfg.odf()?;
    let d = base.geom.diameter;
    let mut best = (0.0, 0.0);
    println!("{:>8} {:>12}", "kappa", "G_PF J/m^2");
    for kappa in (50..=1000).step_by(2) {
        let p = FractureParams {
            geom: FillerGeometry::new(kappa as f64 * d, d, base.geom.interphase_thickness)?,
            ..base
        };
        let g = fracture_energy_uniform(&p, &odf)?;
        if g > best.1 {
            best = (kappa as f64, g);
        }
        if kappa % 50 == 0 {
            println!("{kappa:8} {g:12.3}");
        }
    }
    println!(
        "largest {:.2} J/m^2 at kappa = {}, against sigma/(2 tau) = {:.0}",
        best.1,
        best.0,
        base.sigma_ult / (2.0 * base.tau_int)
    );
    Ok(())
}
