//! Convergence study for the manufactured solution on the unit square.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::forms::{FluxParams, Forms, DEFAULT_C_F};
use crate::math;
use crate::mesh::{Rectangle, SimplicialMesh, StructuredMesh};
use crate::quadrature::{EdgeRule, TriangleRule, DEFAULT_ORDER};
use crate::mesh::BoundaryTag;
use crate::solver::{
    run_simulation, BoundaryConditions, Condition, PicardConfig, Problem, TimeConfig, Trajectory,
};
use crate::{Error, Result};

use super::manufactured::ManufacturedSolution;
use super::norms::{trajectory_errors, ErrorQuadrature, ErrorReport};

/// Cells per side of the mesh family; mean diameters ≈ 0.354, 0.157, 0.079,
/// 0.033, 0.015.
pub const MESH_FAMILY: [usize; 5] = [4, 9, 18, 43, 94];
pub const DEFAULT_JITTER: f64 = 0.15;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub nu: f64,
    pub r: f64,
    pub eps_reg: f64,
    pub c_f: f64,
    pub t_final: f64,
    /// Cells per side, coarsest first.
    pub meshes: Vec<usize>,
    pub jitter: f64,
    pub seed: u64,
    pub quad_order: usize,
    pub picard: PicardConfig,
    /// Fixed time step instead of the `1.5 h` rule.
    pub dt: Option<f64>,
}

impl StudyConfig {
    /// Defaults: the three coarsest meshes of the family, `t_F = 1`.
    pub fn new(nu: f64, r: f64) -> Self {
        Self {
            nu,
            r,
            eps_reg: crate::forms::DEFAULT_EPS_REG,
            c_f: DEFAULT_C_F,
            t_final: 1.0,
            meshes: MESH_FAMILY[..3].to_vec(),
            jitter: DEFAULT_JITTER,
            seed: DEFAULT_SEED,
            quad_order: DEFAULT_ORDER,
            picard: PicardConfig::default(),
            dt: None,
        }
    }

    pub fn full(mut self) -> Self {
        self.meshes = MESH_FAMILY.to_vec();
        self
    }

    pub fn params(&self) -> Result<FluxParams> {
        FluxParams::with_regularization(self.nu, self.r, self.eps_reg)
    }
}

/// `Δt = t_F / ⌈t_F / (1.5 h)⌉`.
pub fn time_step_for(h: f64, t_final: f64) -> Result<TimeConfig> {
    let steps = math::ceil(t_final / (1.5 * h)).max(1.0) as usize;
    TimeConfig::with_steps(t_final, steps)
}

/// The jittered diagonal mesh of the unit square with `n` cells per side.
pub fn test_one_mesh(n: usize, jitter: f64, seed: u64) -> Result<SimplicialMesh> {
    StructuredMesh::new(n, Rectangle::UNIT_SQUARE)
        .jitter(jitter, seed.wrapping_add(n as u64))
        .build()
}

/// One manufactured-solution run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub cells: usize,
    pub h_mean: f64,
    pub h_max: f64,
    pub report: ErrorReport,
    pub max_picard_iterations: usize,
    /// `max_n max_T |∇·u_h^n| / max(1, ‖u_h^n‖)`.
    pub divergence_ratio: f64,
}

pub fn run_test_one(config: &StudyConfig, cells: usize) -> Result<RunResult> {
    let mesh = test_one_mesh(cells, config.jitter, config.seed)?;
    let (mut run, _) = run_manufactured(config, &mesh)?;
    run.cells = cells;
    Ok(run)
}

/// Test 1 on an arbitrary mesh of the unit square: every boundary face gets
/// the exact velocity. Returns the error summary and the full trajectory;
/// `cells` of the summary is zero.
pub fn run_manufactured(config: &StudyConfig, mesh: &SimplicialMesh) -> Result<(RunResult, Trajectory)> {
    let params = config.params()?;
    let stats = mesh.statistics();
    let annotate = |e: Error| Error::Run {
        nu: config.nu,
        r: config.r,
        h: stats.h_mean,
        source: Box::new(e),
    };
    let time = match config.dt {
        Some(dt) => TimeConfig::with_dt(dt, config.t_final),
        None => time_step_for(stats.h_mean, config.t_final),
    }
    .map_err(annotate)?;
    let sol = ManufacturedSolution::new(params);
    let bc = BoundaryTag::ALL.iter().fold(BoundaryConditions::new(), |bc, &tag| {
        bc.with(tag, Condition::Dirichlet(Box::new(move |t, x| sol.velocity(t, x))))
    });
    let space = bc.space(mesh).map_err(annotate)?;
    let forms = Forms::with_order(&space, config.quad_order).map_err(annotate)?;
    let forcing = move |t: f64, x: math::Vec2| sol.forcing(t, x);
    let problem = Problem::new(&forms, params, &bc, time)
        .forcing(&forcing)
        .safeguard(config.c_f)
        .picard(config.picard);
    let traj = run_simulation(&problem, |x| sol.velocity(0.0, x), |_, _, _| Ok(())).map_err(annotate)?;
    let quad = ErrorQuadrature {
        volume: TriangleRule::new(config.quad_order).map_err(annotate)?,
        edge: EdgeRule::new(config.quad_order).map_err(annotate)?,
        c_f: config.c_f,
    };
    let report = trajectory_errors(&space, &traj, &sol, &params, stats.h_mean, &quad);
    let max_picard_iterations = traj.reports.iter().map(|r| r.iterations).max().unwrap_or(0);
    let divergence_ratio = traj
        .reports
        .iter()
        .map(|r| r.max_divergence / r.l2_norm.max(1.0))
        .fold(0.0, f64::max);
    let run = RunResult {
        cells: 0,
        h_mean: stats.h_mean,
        h_max: stats.h_max,
        report,
        max_picard_iterations,
        divergence_ratio,
    };
    Ok((run, traj))
}

/// `log(e₁/e₂) / log(h₁/h₂)`.
pub fn observed_order(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    math::ln(e1 / e2) / math::ln(h1 / h2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nu: f64,
    pub r: f64,
    pub h: f64,
    pub h_max: f64,
    pub dt: f64,
    pub vel_err: f64,
    pub pre_err: f64,
    /// Order against the previous (coarser) row.
    pub order_vel: Option<f64>,
    pub order_pre: Option<f64>,
    pub max_picard_iterations: usize,
    pub divergence_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn from_runs(runs: &[RunResult]) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(runs.len());
        for (i, run) in runs.iter().enumerate() {
            let rep = &run.report;
            let (order_vel, order_pre) = match i.checked_sub(1).map(|j| &runs[j]) {
                Some(prev) => (
                    Some(observed_order(prev.report.vel_err, rep.vel_err, prev.h_mean, run.h_mean)),
                    Some(observed_order(prev.report.pre_err, rep.pre_err, prev.h_mean, run.h_mean)),
                ),
                None => (None, None),
            };
            rows.push(ConvergenceRow {
                nu: rep.nu,
                r: rep.r,
                h: run.h_mean,
                h_max: run.h_max,
                dt: rep.dt,
                vel_err: rep.vel_err,
                pre_err: rep.pre_err,
                order_vel,
                order_pre,
                max_picard_iterations: run.max_picard_iterations,
                divergence_ratio: run.divergence_ratio,
            });
        }
        Self { rows }
    }

    /// Velocity order of the finest pair.
    pub fn finest_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order_vel)
    }
}

/// Run every mesh of the study and tabulate errors and observed orders.
pub fn convergence_study(config: &StudyConfig) -> Result<ConvergenceTable> {
    let runs = config
        .meshes
        .iter()
        .map(|&n| run_test_one(config, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_runs(&runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_step_rule() {
        let t = time_step_for(0.354, 1.0).unwrap();
        assert_eq!(t.steps, 2);
        assert_eq!(time_step_for(0.157, 1.0).unwrap().steps, 5);
        assert_eq!(time_step_for(0.0786, 1.0).unwrap().steps, 9);
        assert!((t.dt * t.steps as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mesh_family_sizes() {
        let expected = [0.354, 0.157, 0.079];
        for (n, h) in MESH_FAMILY.iter().zip(expected) {
            let m = test_one_mesh(*n, DEFAULT_JITTER, DEFAULT_SEED).unwrap();
            let hm = m.statistics().h_mean;
            assert!((hm - h).abs() < 0.1 * h, "n = {n}: {hm}");
        }
    }

    #[test]
    fn orders_from_synthetic_runs() {
        assert!((observed_order(4.0, 1.0, 0.2, 0.1) - 2.0).abs() < 1e-15);
    }
}
