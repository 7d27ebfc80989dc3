//! Parallel parameter sweep from a config file, written as CSV.
//!
//! cargo run --release --example sweep -- crates/core/configs/zeta_sweep.toml /tmp/sweep

use std::path::PathBuf;

use cntfrac::config::RunConfig;
use cntfrac::driver::run_sweep;

fn main() -> cntfrac::Result<()> {
    let mut args = std::env::args().skip(1);
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest.join("configs/zeta_sweep.toml"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cntfrac_sweep"));
    let cfg = RunConfig::load(&config, &[])?;
    let r = run_sweep(&cfg, &out)?;
    let failed = r.points.iter().filter(|p| p.outcome.is_err()).count();
    println!(
        "{} points over {} ({} failed), written to {}",
        r.points.len(),
        r.parameter,
        failed,
        out.join("sweep.csv").display()
    );
    Ok(())
}
