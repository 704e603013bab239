//! Broken norms, the upwind seminorm and the aggregate error measures.

use alloc::vec::Vec;

use crate::forms::{gamma_f, FluxParams};
use crate::math::{self, Vec2};
use crate::mesh::SimplicialMesh;
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::solver::Trajectory;
use crate::spaces::{face_trace, Difference, PiecewiseField, PressureField, VelocityField, VelocitySpace};

use super::manufactured::ManufacturedSolution;

/// `‖v‖²_{L²(Ω)}`.
pub fn l2_norm_squared(mesh: &SimplicialMesh, v: &dyn PiecewiseField, rule: &TriangleRule) -> f64 {
    (0..mesh.num_elements())
        .map(|t| {
            let tri = mesh.element_points(t);
            rule.on_triangle(&tri, mesh.area(t))
                .map(|(_, x, w)| {
                    let vx = v.value(t, x);
                    w * math::dot(vx, vx)
                })
                .sum::<f64>()
        })
        .sum()
}

/// `(‖∇_h v‖^r_{L^r} + Σ_{F∈F_h} h_F^{1−r} ‖[[v]]‖^r_{L^r(F)})^{1/r}`, with
/// the one-sided trace as jump on boundary faces.
pub fn broken_norm_1rh(
    mesh: &SimplicialMesh,
    v: &dyn PiecewiseField,
    r: f64,
    rule: &TriangleRule,
    edge: &EdgeRule,
) -> f64 {
    let mut sum = 0.0;
    for t in 0..mesh.num_elements() {
        let tri = mesh.element_points(t);
        for (_, x, w) in rule.on_triangle(&tri, mesh.area(t)) {
            sum += w * math::powf(math::tensor_norm(&v.gradient(t, x)), r);
        }
    }
    for f in 0..mesh.num_faces() {
        let len = mesh.face(f).length;
        let scale = math::powf(len, 1.0 - r);
        for (tr, w) in face_trace(mesh, v, f, &edge.points)
            .iter()
            .zip(edge.physical_weights(len))
        {
            sum += scale * w * math::powf(math::norm(tr.jump), r);
        }
    }
    math::powf(sum, 1.0 / r)
}

/// `|v|_z = (Σ_{F interior} γ_F(z) ‖[[v]]‖²_{L²(F)})^{1/2}`.
pub fn upwind_seminorm(
    mesh: &SimplicialMesh,
    v: &dyn PiecewiseField,
    z: &VelocityField,
    c_f: f64,
    edge: &EdgeRule,
) -> f64 {
    let mut sum = 0.0;
    for f in mesh.interior_faces() {
        let len = mesh.face(f).length;
        let gamma = gamma_f(z, f, c_f);
        for (tr, w) in face_trace(mesh, v, f, &edge.points)
            .iter()
            .zip(edge.physical_weights(len))
        {
            sum += gamma * w * math::dot(tr.jump, tr.jump);
        }
    }
    math::sqrt(sum)
}

/// `‖p − p_h‖_{L^q(Ω)}`.
pub fn pressure_error_norm(
    mesh: &SimplicialMesh,
    p_h: &PressureField,
    p: impl Fn(Vec2) -> f64,
    q: f64,
    rule: &TriangleRule,
) -> f64 {
    let mut sum = 0.0;
    for t in 0..mesh.num_elements() {
        let tri = mesh.element_points(t);
        for (_, x, w) in rule.on_triangle(&tri, mesh.area(t)) {
            sum += w * math::powf((p(x) - p_h.0[t]).abs(), q);
        }
    }
    math::powf(sum, 1.0 / q)
}

/// Error contributions of one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepErrors {
    pub time: f64,
    pub l2_squared: f64,
    /// `ν ‖u − u_h‖^{r̄}_{1,r,h}`.
    pub viscous: f64,
    /// `|u − u_h|²_{u_h}`.
    pub upwind: f64,
    /// `‖p − p_h‖²_{L^{r'}}`.
    pub pressure: f64,
}

/// The aggregate measures velERR and preERR of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub nu: f64,
    pub r: f64,
    pub h: f64,
    pub dt: f64,
    pub vel_err: f64,
    pub pre_err: f64,
    pub final_l2_squared: f64,
    pub steps: Vec<StepErrors>,
}

impl ErrorReport {
    /// `‖e^N‖² + Δt Σ_n (ν‖e^n‖^{r̄}_{1,r,h} + |e^n|²_{u_h^n})`.
    pub fn combine(nu: f64, r: f64, h: f64, dt: f64, steps: Vec<StepErrors>) -> Self {
        let final_l2_squared = steps.last().map_or(0.0, |s| s.l2_squared);
        let vel_err = final_l2_squared + dt * steps.iter().map(|s| s.viscous + s.upwind).sum::<f64>();
        let pre_err = dt * steps.iter().map(|s| s.pressure).sum::<f64>();
        Self {
            nu,
            r,
            h,
            dt,
            vel_err,
            pre_err,
            final_l2_squared,
            steps,
        }
    }
}

/// Quadrature and stabilization settings shared by the error measures.
#[derive(Debug, Clone)]
pub struct ErrorQuadrature {
    pub volume: TriangleRule,
    pub edge: EdgeRule,
    pub c_f: f64,
}

/// Errors of `approx` (with advecting field `z` for the seminorm) against
/// the manufactured solution at time `t`.
#[allow(clippy::too_many_arguments)]
pub fn step_errors(
    mesh: &SimplicialMesh,
    approx: &dyn PiecewiseField,
    z: &VelocityField,
    p_h: &PressureField,
    sol: &ManufacturedSolution,
    params: &FluxParams,
    t: f64,
    quad: &ErrorQuadrature,
) -> StepErrors {
    let exact = sol.field_at(t);
    let e = Difference(&exact, approx);
    let l2_squared = l2_norm_squared(mesh, &e, &quad.volume);
    let broken = broken_norm_1rh(mesh, &e, params.r, &quad.volume, &quad.edge);
    let semi = upwind_seminorm(mesh, &e, z, quad.c_f, &quad.edge);
    let pe = pressure_error_norm(mesh, p_h, |x| sol.pressure(t, x), params.r_prime(), &quad.volume);
    StepErrors {
        time: t,
        l2_squared,
        viscous: params.nu * math::powf(broken, params.r_bar()),
        upwind: semi * semi,
        pressure: pe * pe,
    }
}

/// velERR and preERR of a computed trajectory.
pub fn trajectory_errors(
    space: &VelocitySpace,
    traj: &Trajectory,
    sol: &ManufacturedSolution,
    params: &FluxParams,
    h: f64,
    quad: &ErrorQuadrature,
) -> ErrorReport {
    let mesh = space.mesh();
    let steps = (1..traj.len())
        .map(|n| {
            let u = &traj.velocities[n];
            step_errors(
                mesh,
                &space.bind(u),
                u,
                &traj.pressures[n],
                sol,
                params,
                traj.times[n],
                quad,
            )
        })
        .collect();
    let dt = if traj.len() > 1 {
        traj.times[1] - traj.times[0]
    } else {
        0.0
    };
    ErrorReport::combine(params.nu, params.r, h, dt, steps)
}

/// velERR alone.
pub fn velocity_error(
    space: &VelocitySpace,
    traj: &Trajectory,
    sol: &ManufacturedSolution,
    params: &FluxParams,
    quad: &ErrorQuadrature,
) -> f64 {
    trajectory_errors(space, traj, sol, params, 0.0, quad).vel_err
}

/// preERR alone.
pub fn pressure_error(
    space: &VelocitySpace,
    traj: &Trajectory,
    sol: &ManufacturedSolution,
    params: &FluxParams,
    quad: &ErrorQuadrature,
) -> f64 {
    trajectory_errors(space, traj, sol, params, 0.0, quad).pre_err
}
