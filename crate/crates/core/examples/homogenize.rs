//! Effective Young's modulus against filler content, uniform and agglomerated.

use cntfrac::config::{Dispersion, RunConfig};
use cntfrac::driver::composite_properties;

fn main() -> cntfrac::Result<()> {
    let base = RunConfig::default();
    println!("{:>8} {:>12} {:>12}", "f_cnt", "E_unif/GPa", "E_agg/GPa");
    for i in 0..=10 {
        let cfg = base.with_value("composite.f_cnt", 0.002 * i as f64)?;
        let u = composite_properties(&cfg, Dispersion::Uniform)?;
        let a = composite_properties(&cfg, Dispersion::Agglomerated)?;
        println!(
            "{:8.3} {:12.4} {:12.4}",
            cfg.composite.f_cnt,
            u.e / 1e9,
            a.e / 1e9
        );
    }
    Ok(())
}
