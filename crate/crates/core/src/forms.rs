//! The power-law flux and the discrete forms of the scheme.
//!
//! Matrices are indexed `[test][trial]`. The viscous form is available both
//! as a nonlinear residual and frozen at a given field (Picard); the
//! convective form and the upwind penalty are frozen at an advecting field.

use alloc::vec;
use alloc::vec::Vec;

use crate::lifting::{eval_p1, DiscreteGradient};
use crate::math::{self, Tensor2, Vec2};
use crate::mesh::BoundaryTag;
use crate::quadrature::{EdgeRule, TriangleRule, DEFAULT_ORDER};
use crate::sparse::{CsrMatrix, Triplets};
use crate::spaces::{VelocityField, VelocitySpace};
use crate::{Error, Result};

pub const DEFAULT_EPS_REG: f64 = 1e-10;
pub const DEFAULT_C_F: f64 = 1e-4;

/// Viscosity and power-law exponent of `σ(A) = ν |A|^{r−2} A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    pub nu: f64,
    pub r: f64,
    pub eps_reg: f64,
}

impl FluxParams {
    pub fn new(nu: f64, r: f64) -> Result<Self> {
        Self::with_regularization(nu, r, DEFAULT_EPS_REG)
    }

    pub fn with_regularization(nu: f64, r: f64, eps_reg: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "nu must be positive and finite (got {nu})"
            )));
        }
        if !(r > 1.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "r must exceed 1 (got {r})"
            )));
        }
        if !(eps_reg >= 0.0) || !eps_reg.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "eps_reg must be nonnegative (got {eps_reg})"
            )));
        }
        Ok(Self { nu, r, eps_reg })
    }

    /// `r' = r / (r − 1)`.
    pub fn r_prime(&self) -> f64 {
        self.r / (self.r - 1.0)
    }

    /// `max(r, 2)`.
    pub fn r_bar(&self) -> f64 {
        self.r.max(2.0)
    }

    /// `min(r, 2)`.
    pub fn r_under(&self) -> f64 {
        self.r.min(2.0)
    }

    pub fn is_newtonian(&self) -> bool {
        self.r == 2.0
    }

    /// Regularized modulus `(s² + ε²)^{1/2}`.
    #[inline]
    pub fn modulus(&self, s: f64) -> f64 {
        if self.eps_reg == 0.0 {
            s.abs()
        } else {
            math::sqrt(s * s + self.eps_reg * self.eps_reg)
        }
    }

    /// `ν m_ε(s)^{r−2}`.
    #[inline]
    pub fn coefficient(&self, s: f64) -> f64 {
        if self.is_newtonian() {
            return self.nu;
        }
        let m = self.modulus(s);
        if m == 0.0 {
            return if self.r > 2.0 { 0.0 } else { f64::INFINITY };
        }
        self.nu * math::powf(m, self.r - 2.0)
    }
}

/// `σ(A) = ν m_ε(|A|)^{r−2} A`.
pub fn sigma(a: &Tensor2, params: &FluxParams) -> Tensor2 {
    let c = coefficient_or_zero(math::tensor_norm(a), params);
    math::tensor_scale(c, a)
}

/// The same flux for vectors, with the Euclidean norm.
pub fn sigma_vec(v: Vec2, params: &FluxParams) -> Vec2 {
    let c = coefficient_or_zero(math::norm(v), params);
    math::scale(c, v)
}

fn coefficient_or_zero(s: f64, params: &FluxParams) -> f64 {
    // σ(0) = 0 even when the unregularized coefficient blows up.
    if s == 0.0 && params.modulus(0.0) == 0.0 {
        0.0
    } else {
        params.coefficient(s)
    }
}

/// `γ_F(z) = max(‖z·n_F‖_{L∞(F)}, C_F)`. The normal trace is linear on the
/// face, so its maximum is attained at an endpoint.
pub fn gamma_f(z: &VelocityField, f: usize, c_f: f64) -> f64 {
    let (d0, d1) = (z.0[2 * f], z.0[2 * f + 1]);
    (d0.abs() + d1.abs()).max(c_f)
}

/// One side of a face jump: `sign · φ_k^{element}` for global DOF `dof`.
#[derive(Debug, Clone, Copy)]
struct JumpEntry {
    dof: usize,
    sign: f64,
    element: usize,
    local: usize,
}

/// Block system `[K Bᵀ; B 0]` over velocity and pressure DOFs.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub n_velocity: usize,
    pub n_pressure: usize,
}

impl AssembledSystem {
    pub fn saddle(k: &CsrMatrix, b: &CsrMatrix, rhs_velocity: Vec<f64>) -> Self {
        let (nu, np) = (k.nrows(), b.nrows());
        assert_eq!(b.ncols(), nu);
        let mut t = Triplets::with_capacity(nu + np, nu + np, k.nnz() + 2 * b.nnz());
        for (i, j, v) in k.triplets() {
            t.push(i, j, v);
        }
        for (q, j, v) in b.triplets() {
            t.push(nu + q, j, v);
            t.push(j, nu + q, v);
        }
        let mut rhs = rhs_velocity;
        rhs.resize(nu + np, 0.0);
        Self {
            matrix: t.build(),
            rhs,
            n_velocity: nu,
            n_pressure: np,
        }
    }
}

/// Dirichlet data `g(face, x)` on penalized boundary faces.
pub type BoundaryData<'a> = &'a dyn Fn(usize, Vec2) -> Vec2;

/// Assembly context: the velocity space, the precomputed discrete gradient
/// and the quadrature rules.
#[derive(Debug, Clone)]
pub struct Forms<'s, 'm> {
    space: &'s VelocitySpace<'m>,
    gradient: DiscreteGradient,
    penalized: Vec<bool>,
    volume_rule: TriangleRule,
    face_rule: EdgeRule,
    exact_volume: TriangleRule,
    exact_face: EdgeRule,
}

impl<'s, 'm> Forms<'s, 'm> {
    pub fn new(space: &'s VelocitySpace<'m>) -> Result<Self> {
        Self::with_order(space, DEFAULT_ORDER)
    }

    /// Faces with a natural (outlet) condition are left out of the viscous
    /// face sums and of the lifting; essential faces are not.
    pub fn with_order(space: &'s VelocitySpace<'m>, order: usize) -> Result<Self> {
        let mesh = space.mesh();
        let penalized: Vec<bool> = (0..mesh.num_faces())
            .map(|f| mesh.face(f).is_interior() || space.is_essential(2 * f))
            .collect();
        let gradient = DiscreteGradient::with_faces(space, |f| penalized[f]);
        Ok(Self {
            space,
            gradient,
            penalized,
            volume_rule: TriangleRule::new(order)?,
            face_rule: EdgeRule::new(order)?,
            exact_volume: TriangleRule::new(2)?,
            exact_face: EdgeRule::new(3)?,
        })
    }

    pub fn space(&self) -> &'s VelocitySpace<'m> {
        self.space
    }

    pub fn discrete_gradient(&self) -> &DiscreteGradient {
        &self.gradient
    }

    pub fn is_penalized(&self, f: usize) -> bool {
        self.penalized[f]
    }

    pub fn quadrature_order(&self) -> usize {
        self.volume_rule.order()
    }

    pub fn boundary_tag(&self, f: usize) -> Option<BoundaryTag> {
        self.space.mesh().boundary_tag(f)
    }

    fn jump_entries(&self, f: usize) -> Vec<JumpEntry> {
        let face = self.space.mesh().face(f);
        let mut out = Vec::with_capacity(12);
        for (side, t) in face.elements().enumerate() {
            let sign = if side == 0 { 1.0 } else { -1.0 };
            for (local, dof) in self.space.element_dofs(t).into_iter().enumerate() {
                out.push(JumpEntry {
                    dof,
                    sign,
                    element: t,
                    local,
                });
            }
        }
        out
    }

    fn entry_value(&self, e: &JumpEntry, x: Vec2) -> Vec2 {
        math::scale(e.sign, self.space.element(e.element).value(e.local, x))
    }

    fn jump_at(&self, u: &VelocityField, f: usize, x: Vec2) -> Vec2 {
        let face = self.space.mesh().face(f);
        let v1 = self.space.value(u, face.first, x);
        match face.second {
            Some(t2) => math::sub(v1, self.space.value(u, t2, x)),
            None => v1,
        }
    }

    fn volume_rule_for(&self, params: &FluxParams) -> &TriangleRule {
        if params.is_newtonian() {
            &self.exact_volume
        } else {
            &self.volume_rule
        }
    }

    fn face_rule_for(&self, params: &FluxParams) -> &EdgeRule {
        if params.is_newtonian() {
            &self.exact_face
        } else {
            &self.face_rule
        }
    }

    /// `a_h(w, ·)` tested against every basis function, with `w − g` in
    /// place of the one-sided trace on penalized boundary faces.
    pub fn a_residual_vector(
        &self,
        w: &VelocityField,
        params: &FluxParams,
        data: Option<BoundaryData>,
    ) -> Vec<f64> {
        let mesh = self.space.mesh();
        let mut out = vec![0.0; self.space.dim()];
        let rule = self.volume_rule_for(params);
        for t in 0..mesh.num_elements() {
            let gw = self.gradient.element(w, t);
            let stencil = self.gradient.stencil(t);
            let maps = self.gradient.element_map(t);
            let tri = mesh.element_points(t);
            for (lam, _, wq) in rule.on_triangle(&tri, mesh.area(t)) {
                let s = sigma(&eval_p1(&gw, lam), params);
                for (&d, m) in stencil.iter().zip(maps) {
                    out[d] += wq * math::frobenius(&s, &eval_p1(m, lam));
                }
            }
        }
        let frule = self.face_rule_for(params);
        for f in (0..mesh.num_faces()).filter(|&f| self.penalized[f]) {
            let face = mesh.face(f);
            let scale = math::powf(face.length, 1.0 - params.r);
            let entries = self.jump_entries(f);
            for (s, wq) in frule.points.iter().zip(frule.physical_weights(face.length)) {
                let x = mesh.face_point(f, *s);
                let mut jump = self.jump_at(w, f, x);
                if let (false, Some(g)) = (face.is_interior(), data) {
                    jump = math::sub(jump, g(f, x));
                }
                let flux = sigma_vec(jump, params);
                for e in &entries {
                    out[e.dof] += wq * scale * math::dot(flux, self.entry_value(e, x));
                }
            }
        }
        out
    }

    /// `a_h(w, v)`.
    pub fn form_a_residual(&self, w: &VelocityField, v: &VelocityField, params: &FluxParams) -> f64 {
        self.a_residual_vector(w, params, None)
            .iter()
            .zip(&v.0)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// The viscous form with its modulus frozen at `w`, and the right-hand
    /// side contributed by boundary data `g`.
    pub fn assemble_a_picard(
        &self,
        w: &VelocityField,
        params: &FluxParams,
        data: Option<BoundaryData>,
    ) -> (CsrMatrix, Vec<f64>) {
        let mesh = self.space.mesh();
        let n = self.space.dim();
        let mut t_mat = Triplets::with_capacity(n, n, 18 * 18 * mesh.num_elements());
        let mut rhs = vec![0.0; n];
        let rule = self.volume_rule_for(params);
        let mut local: Vec<f64> = Vec::new();
        let mut values: Vec<Tensor2> = Vec::new();
        for t in 0..mesh.num_elements() {
            let stencil = self.gradient.stencil(t);
            let maps = self.gradient.element_map(t);
            let m = stencil.len();
            local.clear();
            local.resize(m * m, 0.0);
            let gw = if params.is_newtonian() {
                None
            } else {
                Some(self.gradient.element(w, t))
            };
            let tri = mesh.element_points(t);
            for (lam, _, wq) in rule.on_triangle(&tri, mesh.area(t)) {
                let kappa = match &gw {
                    Some(g) => params.coefficient(math::tensor_norm(&eval_p1(g, lam))),
                    None => params.nu,
                };
                values.clear();
                values.extend(maps.iter().map(|mp| eval_p1(mp, lam)));
                for a in 0..m {
                    for b in a..m {
                        local[a * m + b] += wq * kappa * math::frobenius(&values[a], &values[b]);
                    }
                }
            }
            for a in 0..m {
                for b in a..m {
                    let v = local[a * m + b];
                    t_mat.push(stencil[a], stencil[b], v);
                    if a != b {
                        t_mat.push(stencil[b], stencil[a], v);
                    }
                }
            }
        }
        let frule = self.face_rule_for(params);
        for f in (0..mesh.num_faces()).filter(|&f| self.penalized[f]) {
            let face = mesh.face(f);
            let scale = math::powf(face.length, 1.0 - params.r);
            let entries = self.jump_entries(f);
            let m = entries.len();
            local.clear();
            local.resize(m * m, 0.0);
            let mut jumps = vec![[0.0; 2]; m];
            for (s, wq) in frule.points.iter().zip(frule.physical_weights(face.length)) {
                let x = mesh.face_point(f, *s);
                let g = match (face.is_interior(), data) {
                    (false, Some(g)) => g(f, x),
                    _ => [0.0, 0.0],
                };
                let kappa = if params.is_newtonian() {
                    params.nu
                } else {
                    params.coefficient(math::norm(math::sub(self.jump_at(w, f, x), g)))
                } * scale;
                for (j, e) in jumps.iter_mut().zip(&entries) {
                    *j = self.entry_value(e, x);
                }
                for a in 0..m {
                    rhs[entries[a].dof] += wq * kappa * math::dot(g, jumps[a]);
                    for b in a..m {
                        local[a * m + b] += wq * kappa * math::dot(jumps[a], jumps[b]);
                    }
                }
            }
            for a in 0..m {
                for b in a..m {
                    let v = local[a * m + b];
                    t_mat.push(entries[a].dof, entries[b].dof, v);
                    if a != b {
                        t_mat.push(entries[b].dof, entries[a].dof, v);
                    }
                }
            }
        }
        (t_mat.build(), rhs)
    }

    /// `B[q, v] = −∫ q ∇·v`, exact since `∇·BDM¹ ⊂ P⁰`.
    pub fn assemble_b(&self) -> CsrMatrix {
        let mesh = self.space.mesh();
        let mut t = Triplets::with_capacity(mesh.num_elements(), self.space.dim(), 6 * mesh.num_elements());
        for e in 0..mesh.num_elements() {
            let el = self.space.element(e);
            for (k, dof) in self.space.element_dofs(e).into_iter().enumerate() {
                t.push(e, dof, -mesh.area(e) * el.divergence(k));
            }
        }
        t.build()
    }

    /// `c_h(z; w, v) = ∫ (z·∇_h) w · v − Σ_{F interior} ∫_F (z·n_F) [[w]]·{{v}}`.
    pub fn assemble_c(&self, z: &VelocityField) -> CsrMatrix {
        let mesh = self.space.mesh();
        let n = self.space.dim();
        let mut trip = Triplets::with_capacity(n, n, 36 * mesh.num_elements() + 100 * mesh.num_faces());
        for t in 0..mesh.num_elements() {
            let dofs = self.space.element_dofs(t);
            let el = self.space.element(t);
            let tri = mesh.element_points(t);
            let mut local = [[0.0; 6]; 6];
            for (_, x, wq) in self.exact_volume.on_triangle(&tri, mesh.area(t)) {
                let zx = self.space.value(z, t, x);
                let phi: [Vec2; 6] = core::array::from_fn(|k| el.value(k, x));
                for b in 0..6 {
                    let adv = math::mat_vec(&el.gradient(b), zx);
                    for a in 0..6 {
                        local[a][b] += wq * math::dot(adv, phi[a]);
                    }
                }
            }
            for a in 0..6 {
                for b in 0..6 {
                    trip.push(dofs[a], dofs[b], local[a][b]);
                }
            }
        }
        for f in mesh.interior_faces() {
            let face = mesh.face(f);
            let entries = self.jump_entries(f);
            for (s, wq) in self.exact_face.points.iter().zip(self.exact_face.physical_weights(face.length)) {
                let x = mesh.face_point(f, *s);
                let zn = self.space.normal_trace(z, f, *s);
                if zn == 0.0 {
                    continue;
                }
                let vals: Vec<Vec2> = entries.iter().map(|e| self.entry_value(e, x)).collect();
                for (ea, va) in entries.iter().zip(&vals) {
                    // {{φ}} = ½ |φ| on either side; the jump entry carries the sign.
                    let avg = math::scale(0.5 * ea.sign, *va);
                    for (eb, vb) in entries.iter().zip(&vals) {
                        trip.push(ea.dof, eb.dof, -wq * zn * math::dot(*vb, avg));
                    }
                }
            }
        }
        trip.build()
    }

    /// `j_h(z; w, v) = Σ_{F interior} γ_F(z) ∫_F [[w]]·[[v]]`.
    pub fn assemble_j(&self, z: &VelocityField, c_f: f64) -> CsrMatrix {
        let mesh = self.space.mesh();
        let n = self.space.dim();
        let mut trip = Triplets::with_capacity(n, n, 144 * mesh.num_faces());
        for f in mesh.interior_faces() {
            let face = mesh.face(f);
            let gamma = gamma_f(z, f, c_f);
            let entries = self.jump_entries(f);
            let m = entries.len();
            let mut local = vec![0.0; m * m];
            for (s, wq) in self.exact_face.points.iter().zip(self.exact_face.physical_weights(face.length)) {
                let x = mesh.face_point(f, *s);
                let vals: Vec<Vec2> = entries.iter().map(|e| self.entry_value(e, x)).collect();
                for a in 0..m {
                    for b in 0..m {
                        local[a * m + b] += wq * gamma * math::dot(vals[a], vals[b]);
                    }
                }
            }
            for a in 0..m {
                for b in 0..m {
                    trip.push(entries[a].dof, entries[b].dof, local[a * m + b]);
                }
            }
        }
        trip.build()
    }

    /// Velocity mass matrix.
    pub fn assemble_mass(&self) -> CsrMatrix {
        let mesh = self.space.mesh();
        let n = self.space.dim();
        let mut trip = Triplets::with_capacity(n, n, 36 * mesh.num_elements());
        for t in 0..mesh.num_elements() {
            let dofs = self.space.element_dofs(t);
            let el = self.space.element(t);
            let tri = mesh.element_points(t);
            let mut local = [[0.0; 6]; 6];
            for (_, x, wq) in self.exact_volume.on_triangle(&tri, mesh.area(t)) {
                let phi: [Vec2; 6] = core::array::from_fn(|k| el.value(k, x));
                for a in 0..6 {
                    for b in 0..6 {
                        local[a][b] += wq * math::dot(phi[a], phi[b]);
                    }
                }
            }
            for a in 0..6 {
                for b in 0..6 {
                    trip.push(dofs[a], dofs[b], local[a][b]);
                }
            }
        }
        trip.build()
    }

    /// `F_i = ∫ f · φ_i`.
    pub fn assemble_load(&self, f: impl Fn(Vec2) -> Vec2) -> Vec<f64> {
        let mesh = self.space.mesh();
        let mut out = vec![0.0; self.space.dim()];
        for t in 0..mesh.num_elements() {
            let dofs = self.space.element_dofs(t);
            let el = self.space.element(t);
            let tri = mesh.element_points(t);
            for (_, x, wq) in self.volume_rule.on_triangle(&tri, mesh.area(t)) {
                let fx = f(x);
                for (k, &d) in dofs.iter().enumerate() {
                    out[d] += wq * math::dot(fx, el.value(k, x));
                }
            }
        }
        out
    }
}
