//! Implicit Euler time stepping with a Picard iteration per step.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::face_projection_p1;
use crate::forms::{AssembledSystem, FluxParams, Forms, DEFAULT_C_F};
use crate::math::{self, Vec2};
use crate::mesh::{BoundaryTag, SimplicialMesh};
use crate::quadrature::EdgeRule;
use crate::sparse::{CsrMatrix, SparseLu, Triplets};
use crate::spaces::{PressureField, PressureSpace, VelocityField, VelocitySpace};
use crate::{Error, Result};

/// `Δt`, `t_F` and the number of steps `N = t_F / Δt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub steps: usize,
}

impl TimeConfig {
    pub fn with_steps(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0) || steps == 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "need t_final > 0 and at least one step (got {t_final}, {steps})"
            )));
        }
        Ok(Self {
            dt: t_final / steps as f64,
            t_final,
            steps,
        })
    }

    /// Requires `t_final / dt` to be an integer.
    pub fn with_dt(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_final > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "dt and t_final must be positive (got {dt}, {t_final})"
            )));
        }
        let n = math::round(t_final / dt);
        if n < 1.0 || (n * dt - t_final).abs() > 1e-12 * t_final.max(1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "t_final = {t_final} is not an integer multiple of dt = {dt}"
            )));
        }
        Self::with_steps(t_final, n as usize)
    }

    /// `t^n = n Δt`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t_final
        } else {
            n as f64 * self.dt
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub tol_rel: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            tol_rel: 1e-8,
            max_iter: 50,
        }
    }
}

impl PicardConfig {
    pub fn new(tol_rel: f64, max_iter: usize) -> Result<Self> {
        if !(tol_rel > 0.0) || max_iter == 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "picard tolerance must be positive and max_iter at least 1 (got {tol_rel}, {max_iter})"
            )));
        }
        Ok(Self { tol_rel, max_iter })
    }
}

/// A time-dependent vector field `g(t, x)`.
pub type VectorFn = Box<dyn Fn(f64, Vec2) -> Vec2 + Send + Sync>;

pub enum Condition {
    /// Normal trace imposed through the face DOFs, the full vector weakly
    /// through the viscous face penalty.
    Dirichlet(VectorFn),
    /// Do-nothing outflow.
    Natural,
}

impl core::fmt::Debug for Condition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Condition::Dirichlet(_) => f.write_str("Dirichlet"),
            Condition::Natural => f.write_str("Natural"),
        }
    }
}

#[derive(Debug, Default)]
pub struct BoundaryConditions {
    rules: Vec<(BoundaryTag, Condition)>,
}

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    /// Homogeneous Dirichlet data on every tag.
    pub fn no_slip() -> Self {
        let mut bc = Self::new();
        for tag in [
            BoundaryTag::Wall,
            BoundaryTag::Inlet,
            BoundaryTag::Outlet,
            BoundaryTag::Generic,
        ] {
            bc = bc.with(tag, Condition::Dirichlet(Box::new(|_, _| [0.0, 0.0])));
        }
        bc
    }

    /// Set (or replace) the condition on `tag`.
    pub fn with(mut self, tag: BoundaryTag, condition: Condition) -> Self {
        self.rules.retain(|(t, _)| *t != tag);
        self.rules.push((tag, condition));
        self
    }

    pub fn condition(&self, tag: BoundaryTag) -> Option<&Condition> {
        self.rules.iter().find(|(t, _)| *t == tag).map(|(_, c)| c)
    }

    pub fn is_natural(&self, tag: BoundaryTag) -> bool {
        matches!(self.condition(tag), Some(Condition::Natural))
    }

    pub fn has_natural(&self, mesh: &SimplicialMesh) -> bool {
        mesh.boundary_faces()
            .any(|f| mesh.boundary_tag(f).is_some_and(|t| self.is_natural(t)))
    }

    /// Every boundary face must have a condition.
    pub fn validate(&self, mesh: &SimplicialMesh) -> Result<()> {
        for f in mesh.boundary_faces() {
            let tag = mesh.boundary_tag(f).unwrap_or(BoundaryTag::Generic);
            if self.condition(tag).is_none() {
                return Err(Error::MissingBoundaryCondition { face: f });
            }
        }
        Ok(())
    }

    /// The velocity space matching these conditions.
    pub fn space<'m>(&self, mesh: &'m SimplicialMesh) -> Result<VelocitySpace<'m>> {
        self.validate(mesh)?;
        VelocitySpace::with_natural(mesh, |tag| self.is_natural(tag))
    }

    /// Prescribed values of the essential DOFs at time `t`: the `P¹(F)`
    /// projection of `g·n_F`.
    pub fn essential_values(&self, space: &VelocitySpace, t: f64) -> Result<Vec<(usize, f64)>> {
        let mesh = space.mesh();
        let rule = EdgeRule::new(10)?;
        let mut out = Vec::new();
        for f in mesh.boundary_faces() {
            if !space.is_essential(2 * f) {
                continue;
            }
            let tag = mesh.boundary_tag(f).unwrap_or(BoundaryTag::Generic);
            match self.condition(tag) {
                Some(Condition::Dirichlet(g)) => {
                    let n = mesh.face(f).normal;
                    let d = face_projection_p1(mesh, f, |x| math::dot(g(t, x), n), &rule);
                    out.push((2 * f, d[0]));
                    out.push((2 * f + 1, d[1]));
                }
                Some(Condition::Natural) | None => {
                    return Err(Error::MissingBoundaryCondition { face: f })
                }
            }
        }
        Ok(out)
    }

    /// Dirichlet data on boundary face `f`, for the weak penalty. Natural
    /// faces get zero.
    pub fn data_at(&self, mesh: &SimplicialMesh, f: usize, t: f64, x: Vec2) -> Vec2 {
        let tag = mesh.boundary_tag(f).unwrap_or(BoundaryTag::Generic);
        match self.condition(tag) {
            Some(Condition::Dirichlet(g)) => g(t, x),
            _ => [0.0, 0.0],
        }
    }
}

/// The saddle system after eliminating prescribed velocity DOFs and, when
/// the pressure is determined only up to a constant, one pressure DOF.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `unknowns[new] = old` index into the full system.
    pub unknowns: Vec<usize>,
    pub fixed: Vec<(usize, f64)>,
    pub n_velocity: usize,
    pub n_pressure: usize,
    pub pinned_pressure: Option<usize>,
}

/// Eliminate `fixed` velocity values (moving their columns to the right-hand
/// side) and, if `pin_pressure`, the first pressure DOF.
pub fn apply_boundary_conditions(
    system: &AssembledSystem,
    fixed: &[(usize, f64)],
    pin_pressure: bool,
) -> ReducedSystem {
    let n = system.matrix.nrows();
    let nu = system.n_velocity;
    let mut value: Vec<Option<f64>> = vec![None; n];
    for &(d, v) in fixed {
        value[d] = Some(v);
    }
    let pinned = if pin_pressure && system.n_pressure > 0 {
        value[nu] = Some(0.0);
        Some(0)
    } else {
        None
    };
    let mut new_index = vec![usize::MAX; n];
    let mut unknowns = Vec::with_capacity(n);
    for i in 0..n {
        if value[i].is_none() {
            new_index[i] = unknowns.len();
            unknowns.push(i);
        }
    }
    let m = unknowns.len();
    let mut rhs: Vec<f64> = unknowns.iter().map(|&i| system.rhs[i]).collect();
    let mut t = Triplets::with_capacity(m, m, system.matrix.nnz());
    for (i, j, a) in system.matrix.triplets() {
        let ni = new_index[i];
        if ni == usize::MAX {
            continue;
        }
        match value[j] {
            Some(g) => rhs[ni] -= a * g,
            None => t.push(ni, new_index[j], a),
        }
    }
    ReducedSystem {
        matrix: t.build(),
        rhs,
        unknowns,
        fixed: fixed.to_vec(),
        n_velocity: nu,
        n_pressure: system.n_pressure,
        pinned_pressure: pinned,
    }
}

/// Solve a reduced saddle system; returns full velocity and pressure
/// vectors. With a pinned pressure the result is shifted to zero mean.
pub fn solve_saddle_point(
    reduced: &ReducedSystem,
    pressure: &PressureSpace,
) -> Result<(VelocityField, PressureField)> {
    let nu = reduced.n_velocity;
    let lu = SparseLu::new(&reduced.matrix).map_err(|e| match e {
        Error::Singular { index, .. } => {
            let old = reduced.unknowns[index];
            Error::Singular {
                index: old,
                block: if old < nu { "velocity" } else { "pressure" },
            }
        }
        other => other,
    })?;
    let x = lu.solve_refined(&reduced.matrix, &reduced.rhs, 2);
    let mut full = vec![0.0; nu + reduced.n_pressure];
    for (&old, v) in reduced.unknowns.iter().zip(&x) {
        full[old] = *v;
    }
    for &(d, v) in &reduced.fixed {
        full[d] = v;
    }
    let p_vals = full.split_off(nu);
    let mut p = PressureField(p_vals);
    if reduced.pinned_pressure.is_some() {
        pressure.remove_mean(&mut p);
    }
    Ok((VelocityField(full), p))
}

/// Right-hand side `f(t, x)`.
pub type Forcing<'a> = &'a (dyn Fn(f64, Vec2) -> Vec2 + Sync);

/// Everything needed to advance the discrete problem.
pub struct Problem<'a, 's, 'm> {
    pub forms: &'a Forms<'s, 'm>,
    pub params: FluxParams,
    pub c_f: f64,
    pub bc: &'a BoundaryConditions,
    pub forcing: Option<Forcing<'a>>,
    pub time: TimeConfig,
    pub picard: PicardConfig,
}

impl<'a, 's, 'm> Problem<'a, 's, 'm> {
    pub fn new(
        forms: &'a Forms<'s, 'm>,
        params: FluxParams,
        bc: &'a BoundaryConditions,
        time: TimeConfig,
    ) -> Self {
        Self {
            forms,
            params,
            c_f: DEFAULT_C_F,
            bc,
            forcing: None,
            time,
            picard: PicardConfig::default(),
        }
    }

    pub fn forcing(mut self, f: Forcing<'a>) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn safeguard(mut self, c_f: f64) -> Self {
        self.c_f = c_f;
        self
    }

    pub fn picard(mut self, picard: PicardConfig) -> Self {
        self.picard = picard;
        self
    }
}

/// Matrices that do not change during a run.
#[derive(Debug, Clone)]
pub struct StepOperators {
    pub mass: CsrMatrix,
    pub divergence: CsrMatrix,
    pin_pressure: bool,
}

impl StepOperators {
    pub fn new(problem: &Problem) -> Self {
        let mesh = problem.forms.space().mesh();
        Self {
            mass: problem.forms.assemble_mass(),
            divergence: problem.forms.assemble_b(),
            pin_pressure: !problem.bc.has_natural(mesh),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub velocity: VelocityField,
    pub pressure: PressureField,
    pub iterations: usize,
    /// Relative increments `‖u^{l+1} − u^l‖_M / ‖u^{l+1}‖_M`.
    pub history: Vec<f64>,
}

fn mass_norm(mass: &CsrMatrix, v: &[f64]) -> f64 {
    math::sqrt(mass.bilinear(v, v).max(0.0))
}

/// One implicit Euler step at time `t`, starting the iteration from
/// `u_prev`.
pub fn picard_step(
    problem: &Problem,
    ops: &StepOperators,
    u_prev: &VelocityField,
    t: f64,
) -> Result<PicardOutcome> {
    let forms = problem.forms;
    let space = forms.space();
    let mesh = space.mesh();
    let pressure = PressureSpace::new(mesh);
    let dt = problem.time.dt;
    let fixed = problem.bc.essential_values(space, t)?;
    let load = match problem.forcing {
        Some(f) => forms.assemble_load(|x| f(t, x)),
        None => vec![0.0; space.dim()],
    };
    let m_prev = ops.mass.mul_vec(&u_prev.0);
    let bc = problem.bc;
    let data = |f: usize, x: Vec2| bc.data_at(mesh, f, t, x);
    let mut w = u_prev.clone();
    let mut history = Vec::new();
    for it in 1..=problem.picard.max_iter {
        let (a, rhs_a) = forms.assemble_a_picard(&w, &problem.params, Some(&data));
        let c = forms.assemble_c(&w);
        let j = forms.assemble_j(&w, problem.c_f);
        let k = CsrMatrix::linear_combination(&[(1.0 / dt, &ops.mass), (1.0, &a), (1.0, &c), (1.0, &j)]);
        let rhs: Vec<f64> = (0..space.dim())
            .map(|i| m_prev[i] / dt + load[i] + rhs_a[i])
            .collect();
        let system = AssembledSystem::saddle(&k, &ops.divergence, rhs);
        let reduced = apply_boundary_conditions(&system, &fixed, ops.pin_pressure);
        let (u, p) = solve_saddle_point(&reduced, &pressure)?;
        let diff: Vec<f64> = u.0.iter().zip(&w.0).map(|(a, b)| a - b).collect();
        let inc = mass_norm(&ops.mass, &diff);
        let size = mass_norm(&ops.mass, &u.0);
        history.push(if size > 0.0 { inc / size } else { inc });
        let converged = inc <= problem.picard.tol_rel * size || inc <= 1e-14;
        w = u;
        if converged {
            return Ok(PicardOutcome {
                velocity: w,
                pressure: p,
                iterations: it,
                history,
            });
        }
    }
    Err(Error::PicardNonConvergence { history })
}

/// Momentum residual of the nonlinear discrete system at `(u, p)`, tested
/// against every free velocity basis function.
pub fn momentum_residual(
    problem: &Problem,
    ops: &StepOperators,
    u: &VelocityField,
    p: &PressureField,
    u_prev: &VelocityField,
    t: f64,
) -> Vec<f64> {
    let forms = problem.forms;
    let space = forms.space();
    let mesh = space.mesh();
    let bc = problem.bc;
    let data = |f: usize, x: Vec2| bc.data_at(mesh, f, t, x);
    let dt = problem.time.dt;
    let du: Vec<f64> = u.0.iter().zip(&u_prev.0).map(|(a, b)| (a - b) / dt).collect();
    let mut r = ops.mass.mul_vec(&du);
    let a = forms.a_residual_vector(u, &problem.params, Some(&data));
    let c = forms.assemble_c(u).mul_vec(&u.0);
    let j = forms.assemble_j(u, problem.c_f).mul_vec(&u.0);
    let bp = ops.divergence.transpose_mul_vec(&p.0);
    let load = match problem.forcing {
        Some(f) => forms.assemble_load(|x| f(t, x)),
        None => vec![0.0; space.dim()],
    };
    for i in 0..r.len() {
        r[i] += a[i] + c[i] + j[i] + bp[i] - load[i];
    }
    r.into_iter()
        .enumerate()
        .filter(|(i, _)| !space.is_essential(*i))
        .map(|(_, v)| v)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub time: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub max_divergence: f64,
    pub l2_norm: f64,
}

/// The discrete states `u_h^n, p_h^n` for `n = 0, …, N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub velocities: Vec<VelocityField>,
    /// `pressures[0]` is zero; the scheme has no initial pressure.
    pub pressures: Vec<PressureField>,
    pub reports: Vec<StepReport>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_velocity(&self) -> &VelocityField {
        self.velocities.last().expect("trajectory holds the initial state")
    }

    pub fn last_pressure(&self) -> &PressureField {
        self.pressures.last().expect("trajectory holds the initial state")
    }
}

/// Advance from `u⁰` (interpolated) through all time steps. `observer` is
/// called after every accepted step; an error from it stops the run.
pub fn run_simulation(
    problem: &Problem,
    u0: impl Fn(Vec2) -> Vec2,
    mut observer: impl FnMut(&StepReport, &VelocityField, &PressureField) -> Result<()>,
) -> Result<Trajectory> {
    let forms = problem.forms;
    let space = forms.space();
    let mesh = space.mesh();
    problem.bc.validate(mesh)?;
    let ops = StepOperators::new(problem);
    let initial = space.rt_interpolate(u0);
    let mut traj = Trajectory {
        times: vec![0.0],
        velocities: vec![initial],
        pressures: vec![PressureSpace::new(mesh).zeros()],
        reports: Vec::new(),
    };
    for n in 1..=problem.time.steps {
        let t = problem.time.time(n);
        let prev = traj.velocities.last().expect("nonempty");
        let out = picard_step(problem, &ops, prev, t).map_err(|e| Error::Step {
            step: n,
            source: Box::new(e),
        })?;
        let report = StepReport {
            step: n,
            time: t,
            iterations: out.iterations,
            history: out.history,
            max_divergence: space.max_divergence(&out.velocity),
            l2_norm: mass_norm(&ops.mass, &out.velocity.0),
        };
        observer(&report, &out.velocity, &out.pressure)?;
        traj.times.push(t);
        traj.velocities.push(out.velocity);
        traj.pressures.push(out.pressure);
        traj.reports.push(report);
    }
    Ok(traj)
}
