use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Command, OneOrMany, RunConfig, Settings};
use crate::driver;
use crate::error::Result;
use crate::tables::convergence_records;

#[derive(Debug, Parser)]
#[command(name = "hdivflow", version, about = "H(div) BDM1/P0 solver for the unsteady p-Navier-Stokes equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Subcommands,
}

#[derive(Debug, Subcommand)]
pub enum Subcommands {
    /// Manufactured-solution convergence study on the unit square
    Convergence(Flags),
    /// Channel benchmark with parabolic inflow and a cavity in the upper wall
    Channel(Flags),
    /// One manufactured-solution run with per-step checkpoints
    Run(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with the same keys as the long flags (`-` becomes `_`)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Viscosity; a comma-separated list runs a sweep
    #[arg(long, value_delimiter = ',')]
    pub nu: Vec<f64>,
    /// Flow-behaviour index r > 1; a comma-separated list runs a sweep
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    /// Upwind safeguard C_F
    #[arg(long)]
    pub cf: Option<f64>,
    /// Time step; must divide the final time
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time
    #[arg(long)]
    pub tf: Option<f64>,
    /// Mesh file (run only)
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Number of meshes of the refinement family, coarsest first
    #[arg(long)]
    pub meshes: Option<usize>,
    /// Use all five meshes of the family
    #[arg(long)]
    pub full: bool,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Independent runs executed concurrently
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Regularization of the power-law modulus
    #[arg(long)]
    pub eps_reg: Option<f64>,
    /// Relative Picard tolerance
    #[arg(long)]
    pub picard_tol: Option<f64>,
    /// Maximum Picard iterations per step
    #[arg(long)]
    pub picard_max: Option<usize>,
}

fn list(values: &[f64]) -> Option<OneOrMany> {
    match values {
        [] => None,
        [v] => Some(OneOrMany::One(*v)),
        vs => Some(OneOrMany::Many(vs.to_vec())),
    }
}

impl Flags {
    pub fn settings(&self) -> Settings {
        Settings {
            command: None,
            nu: list(&self.nu),
            r: list(&self.r),
            eps_reg: self.eps_reg,
            cf: self.cf,
            dt: self.dt,
            tf: self.tf,
            mesh: self.mesh.clone(),
            meshes: self.meshes,
            full: self.full.then_some(true),
            out: self.out.clone(),
            jobs: self.jobs,
            quad_order: self.quad_order,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
        }
    }

    /// The config file (if any) overridden by explicit flags.
    pub fn resolve(&self, command: Command) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        RunConfig::resolve(command, base.merge(self.settings()))
    }
}

impl Cli {
    pub fn config(&self) -> Result<RunConfig> {
        match &self.command {
            Subcommands::Convergence(f) => f.resolve(Command::Convergence),
            Subcommands::Channel(f) => f.resolve(Command::Channel),
            Subcommands::Run(f) => f.resolve(Command::Run),
        }
    }
}

fn fmt_order(o: Option<f64>) -> String {
    o.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

/// Run the selected command and print a summary to stdout.
pub fn execute(cli: &Cli) -> Result<()> {
    let config = cli.config()?;
    match config.command {
        Command::Convergence => {
            let tables = driver::convergence(&config)?;
            println!("{:>8} {:>6} {:>9} {:>9} {:>12} {:>12} {:>9} {:>9}", "nu", "r", "h", "dt", "velERR", "preERR", "ord_vel", "ord_pre");
            for row in convergence_records(&tables) {
                println!(
                    "{:>8e} {:>6} {:>9.5} {:>9.5} {:>12.5e} {:>12.5e} {:>9} {:>9}",
                    row.nu,
                    row.r,
                    row.h,
                    row.dt,
                    row.vel_err,
                    row.pre_err,
                    fmt_order(row.order_vel),
                    fmt_order(row.order_pre)
                );
            }
            println!("wrote {}", config.out.join("convergence.csv").display());
        }
        Command::Channel => {
            for (res, files) in driver::channel(&config)? {
                let peaks: Vec<String> = res
                    .cutlines
                    .iter()
                    .map(|c| format!("x={}: {:.6}", c.x, c.peak()))
                    .collect();
                println!(
                    "nu = {}, r = {}: mass balance {:.3e}, peak u_x [{}]",
                    res.config.nu,
                    res.config.r,
                    res.mass_balance(),
                    peaks.join(", ")
                );
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
        }
        Command::Run => {
            for run in driver::single(&config)? {
                println!(
                    "nu = {}, r = {}: h = {:.5}, dt = {:.5}, velERR = {:.6e}, preERR = {:.6e}, max Picard iterations {}",
                    run.report.nu,
                    run.report.r,
                    run.h_mean,
                    run.report.dt,
                    run.report.vel_err,
                    run.report.pre_err,
                    run.max_picard_iterations
                );
            }
            println!("wrote {}", config.out.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse_into_settings() {
        let cli = Cli::try_parse_from([
            "hdivflow", "convergence", "--nu", "1,1e-5", "--r", "2.5", "--meshes", "2", "--jobs", "3",
        ])
        .unwrap();
        let c = cli.config().unwrap();
        assert_eq!(c.nu, vec![1.0, 1e-5]);
        assert_eq!(c.r, vec![2.5]);
        assert_eq!((c.meshes, c.jobs), (2, 3));
    }

    #[test]
    fn invalid_flag_values_are_reported() {
        let cli = Cli::try_parse_from(["hdivflow", "channel", "--r", "0.5"]).unwrap();
        assert!(cli.config().unwrap_err().to_string().contains("r must exceed 1"));
        assert!(Cli::try_parse_from(["hdivflow", "convergence", "--bogus"]).is_err());
        assert!(Cli::try_parse_from(["hdivflow", "convergence", "--nu", "abc"]).is_err());
    }
}
