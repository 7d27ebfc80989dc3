use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cntfrac::config::RunConfig;
use cntfrac::driver;

#[derive(Parser)]
#[command(
    name = "cntfrac",
    version,
    about = "CNT composite micromechanics and phase-field fracture"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective stiffness for uniform and agglomerated dispersions.
    Homogenize(Common),
    /// Fracture energy with and without agglomeration.
    FractureEnergy(Common),
    /// Effective properties along one parameter axis.
    Sweep(Common),
    /// Phase-field fracture of one of the plate problems.
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// `section.key=value`, applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Homogenize(c)
    | Command::FractureEnergy(c)
    | Command::Sweep(c)
    | Command::Simulate(c)) = &cli.command;
    let result = RunConfig::load(&c.config, &c.overrides).and_then(|cfg| match &cli.command {
        Command::Homogenize(_) => driver::run_homogenize(&cfg, &c.out).map(|p| {
            for x in p {
                println!("{:?}: E = {:.6e} Pa, nu = {:.6}", x.dispersion, x.e, x.nu);
            }
        }),
        Command::FractureEnergy(_) => driver::run_fracture_energy(&cfg, &c.out).map(|p| {
            for x in p {
                println!("{:?}: G_c = {:.6} J/m^2", x.dispersion, x.fracture.g_c);
            }
        }),
        Command::Sweep(_) => driver::run_sweep(&cfg, &c.out).map(|r| {
            let failed = r.points.iter().filter(|p| p.outcome.is_err()).count();
            println!("{} points, {} failed", r.points.len(), failed);
        }),
        Command::Simulate(_) => driver::simulate_with(&cfg, &c.out, |_, s| {
            eprintln!(
                "step {:4}  u = {:.5} mm  F = {:.6} kN  iterations {}",
                s.step, s.applied, s.reaction, s.iterations
            );
        })
        .map(|o| {
            if let Some(p) = o.result.curve.peak() {
                println!("peak {:.6} kN at {:.5} mm", p.reaction, p.applied);
            }
        }),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
