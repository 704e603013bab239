//! Channel with a cavity in the upper wall: parabolic inflow on the left,
//! no-slip walls, do-nothing outflow on the right.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::forms::{FluxParams, Forms, DEFAULT_C_F, DEFAULT_EPS_REG};
use crate::math::{self, Vec2, PI};
use crate::mesh::{BoundaryTag, Rectangle, SimplicialMesh, StructuredMesh};
use crate::quadrature::DEFAULT_ORDER;
use crate::solver::{
    run_simulation, BoundaryConditions, Condition, PicardConfig, Problem, StepReport, TimeConfig,
};
use crate::spaces::{PressureField, VelocityField, VelocitySpace};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub nu: f64,
    pub r: f64,
    pub eps_reg: f64,
    pub c_f: f64,
    pub length: f64,
    /// Cavity on the upper wall: `1 + height · cos²(π (x − center) / width)`
    /// for `|x − center| < width / 2`.
    pub hump_center: f64,
    pub hump_width: f64,
    pub hump_height: f64,
    pub nx: usize,
    pub ny: usize,
    pub inlet_max: f64,
    pub t_final: f64,
    pub steps: usize,
    pub stations: Vec<f64>,
    pub samples: usize,
    pub quad_order: usize,
    pub picard: PicardConfig,
}

impl ChannelConfig {
    pub fn new(r: f64) -> Self {
        Self {
            nu: 1e-2,
            r,
            eps_reg: DEFAULT_EPS_REG,
            c_f: DEFAULT_C_F,
            length: 3.0,
            hump_center: 1.5,
            hump_width: 1.5,
            hump_height: 0.5,
            nx: 36,
            ny: 12,
            inlet_max: 0.3,
            t_final: 10.0,
            steps: 20,
            stations: alloc::vec![0.5, 1.0, 2.5],
            samples: 41,
            quad_order: DEFAULT_ORDER,
            picard: PicardConfig::default(),
        }
    }

    /// Height of the upper wall above `y = 0`.
    pub fn top(&self, x: f64) -> f64 {
        let d = (x - self.hump_center) / self.hump_width;
        if d.abs() < 0.5 {
            let c = math::cos(PI * d);
            1.0 + self.hump_height * c * c
        } else {
            1.0
        }
    }

    pub fn inflow(&self, y: f64) -> f64 {
        4.0 * self.inlet_max * y * (1.0 - y)
    }
}

/// Structured mesh of `[0, L] × [0, 1]` stretched vertically to the upper
/// wall, with inlet, outlet and wall tags.
pub fn channel_mesh(config: &ChannelConfig) -> Result<SimplicialMesh> {
    let mut mesh = StructuredMesh::new(config.ny, Rectangle::new(0.0, config.length, 0.0, 1.0))
        .with_cells(config.nx, config.ny)
        .build_mapped(|p| [p[0], p[1] * config.top(p[0])])?;
    let tol = 1e-9 * config.length;
    let length = config.length;
    mesh.tag_boundary(|x, _| {
        if x[0] < tol {
            BoundaryTag::Inlet
        } else if x[0] > length - tol {
            BoundaryTag::Outlet
        } else {
            BoundaryTag::Wall
        }
    });
    Ok(mesh)
}

/// `u_x` sampled along a vertical segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Cutline {
    pub x: f64,
    /// `(y, u_x)` pairs, bottom to top.
    pub values: Vec<(f64, f64)>,
}

impl Cutline {
    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sample `u_x` at `samples` points of the segment `{x} × (y0, y1)`; points
/// are cell-centered so they stay off the walls.
pub fn extract_cutline(
    space: &VelocitySpace,
    u: &VelocityField,
    x: f64,
    y0: f64,
    y1: f64,
    samples: usize,
) -> Result<Cutline> {
    let mesh = space.mesh();
    let mut values = Vec::with_capacity(samples);
    for k in 0..samples {
        let y = y0 + (y1 - y0) * (k as f64 + 0.5) / samples as f64;
        let p = [x, y];
        let t = mesh.locate(p).ok_or(crate::Error::PointOutside {
            element: usize::MAX,
            x,
            y,
        })?;
        values.push((y, space.value(u, t, p)[0]));
    }
    Ok(Cutline { x, values })
}

/// Net outward flux through the boundary faces carrying `tag`.
pub fn tagged_flux(space: &VelocitySpace, u: &VelocityField, tag: BoundaryTag) -> f64 {
    let mesh = space.mesh();
    mesh.boundary_faces()
        .filter(|&f| mesh.boundary_tag(f) == Some(tag))
        .map(|f| space.boundary_flux(u, f))
        .sum()
}

#[derive(Debug, Clone)]
pub struct ChannelResult {
    pub config: ChannelConfig,
    pub mesh: SimplicialMesh,
    pub velocity: VelocityField,
    pub pressure: PressureField,
    pub cutlines: Vec<Cutline>,
    pub inlet_flux: f64,
    pub outlet_flux: f64,
    pub wall_flux: f64,
    pub reports: Vec<StepReport>,
}

impl ChannelResult {
    /// `|inlet + outlet + wall flux|`.
    pub fn mass_balance(&self) -> f64 {
        (self.inlet_flux + self.outlet_flux + self.wall_flux).abs()
    }
}

/// Run the channel to `t_F` from rest and extract cutlines at the final time.
pub fn channel_benchmark(config: &ChannelConfig) -> Result<ChannelResult> {
    let params = FluxParams::with_regularization(config.nu, config.r, config.eps_reg)?;
    let mesh = channel_mesh(config)?;
    let time = TimeConfig::with_steps(config.t_final, config.steps)?;
    let profile = config.clone();
    let bc = BoundaryConditions::no_slip()
        .with(
            BoundaryTag::Inlet,
            Condition::Dirichlet(Box::new(move |_, x: Vec2| [profile.inflow(x[1]), 0.0])),
        )
        .with(BoundaryTag::Outlet, Condition::Natural);
    let (velocity, pressure, cutlines, fluxes, reports) = {
        let space = bc.space(&mesh)?;
        let forms = Forms::with_order(&space, config.quad_order)?;
        let problem = Problem::new(&forms, params, &bc, time)
            .safeguard(config.c_f)
            .picard(config.picard);
        let traj = run_simulation(&problem, |_| [0.0, 0.0], |_, _, _| Ok(()))?;
        let u = traj.last_velocity().clone();
        let p = traj.last_pressure().clone();
        let cutlines = config
            .stations
            .iter()
            .map(|&x| extract_cutline(&space, &u, x, 0.0, config.top(x), config.samples))
            .collect::<Result<Vec<_>>>()?;
        let fluxes = [
            tagged_flux(&space, &u, BoundaryTag::Inlet),
            tagged_flux(&space, &u, BoundaryTag::Outlet),
            tagged_flux(&space, &u, BoundaryTag::Wall),
        ];
        (u, p, cutlines, fluxes, traj.reports)
    };
    Ok(ChannelResult {
        config: config.clone(),
        mesh,
        velocity,
        pressure,
        cutlines,
        inlet_flux: fluxes[0],
        outlet_flux: fluxes[1],
        wall_flux: fluxes[2],
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(r: f64) -> ChannelConfig {
        let mut c = ChannelConfig::new(r);
        c.nx = 12;
        c.ny = 4;
        c.steps = 4;
        c.t_final = 2.0;
        c
    }

    #[test]
    fn geometry_and_tags() {
        let c = ChannelConfig::new(2.0);
        assert_eq!(c.top(0.2), 1.0);
        assert!((c.top(1.5) - 1.5).abs() < 1e-15);
        assert!((c.inflow(0.5) - 0.3).abs() < 1e-15);
        let m = channel_mesh(&small(2.0)).unwrap();
        let count = |tag| m.boundary_faces().filter(|&f| m.boundary_tag(f) == Some(tag)).count();
        assert_eq!(count(BoundaryTag::Inlet), 4);
        assert_eq!(count(BoundaryTag::Outlet), 4);
        assert_eq!(count(BoundaryTag::Wall), 24);
    }

    #[test]
    fn zero_inflow_gives_zero_solution() {
        let mut c = small(1.5);
        c.inlet_max = 0.0;
        let res = channel_benchmark(&c).unwrap();
        assert!(res.velocity.0.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn coarse_channel_balances_mass() {
        let res = channel_benchmark(&small(2.0)).unwrap();
        // ∫ 4·0.3·y(1−y) dy = 0.2 enters through the inlet.
        assert!((res.inlet_flux + 0.2).abs() < 1e-10);
        assert!(res.mass_balance() < 1e-8);
        assert_eq!(res.cutlines.len(), 3);
        assert!(res.cutlines.iter().all(|c| c.peak() > 0.0));
    }
}
