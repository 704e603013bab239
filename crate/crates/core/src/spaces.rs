//! Global discrete spaces: BDM¹ velocities with strongly imposed normal
//! traces and piecewise-constant pressures.
//!
//! The velocity DOFs of face `f` are `2f` (mean normal flux density) and
//! `2f + 1` (linear normal moment), see [`crate::basis`].

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{face_projection_p1, BdmElement};
use crate::math::{self, Tensor2, Vec2};
use crate::mesh::{BoundaryTag, SimplicialMesh};
use crate::quadrature::EdgeRule;
use crate::{Error, Result};

/// Coefficients of a velocity in a [`VelocitySpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField(pub Vec<f64>);

/// Elementwise pressure values in a [`PressureSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField(pub Vec<f64>);

impl VelocityField {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl PressureField {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }
}

/// A field that can be evaluated elementwise together with its broken
/// gradient (`∇_h`). Implemented by discrete velocities, analytic fields and
/// differences of the two.
pub trait PiecewiseField {
    fn value(&self, t: usize, x: Vec2) -> Vec2;
    fn gradient(&self, t: usize, x: Vec2) -> Tensor2;
}

/// An analytic field given by closures for the value and the gradient.
pub struct AnalyticField<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> PiecewiseField for AnalyticField<V, G>
where
    V: Fn(Vec2) -> Vec2,
    G: Fn(Vec2) -> Tensor2,
{
    fn value(&self, _t: usize, x: Vec2) -> Vec2 {
        (self.value)(x)
    }

    fn gradient(&self, _t: usize, x: Vec2) -> Tensor2 {
        (self.gradient)(x)
    }
}

/// `a − b`.
pub struct Difference<'a, A: ?Sized, B: ?Sized>(pub &'a A, pub &'a B);

impl<A: PiecewiseField + ?Sized, B: PiecewiseField + ?Sized> PiecewiseField for Difference<'_, A, B> {
    fn value(&self, t: usize, x: Vec2) -> Vec2 {
        math::sub(self.0.value(t, x), self.1.value(t, x))
    }

    fn gradient(&self, t: usize, x: Vec2) -> Tensor2 {
        math::tensor_sub(&self.0.gradient(t, x), &self.1.gradient(t, x))
    }
}

/// A velocity field bound to its space.
#[derive(Clone, Copy)]
pub struct DiscreteVelocity<'a> {
    pub space: &'a VelocitySpace<'a>,
    pub field: &'a VelocityField,
}

impl PiecewiseField for DiscreteVelocity<'_> {
    fn value(&self, t: usize, x: Vec2) -> Vec2 {
        self.space.value(self.field, t, x)
    }

    fn gradient(&self, t: usize, _x: Vec2) -> Tensor2 {
        self.space.gradient(self.field, t)
    }
}

#[derive(Debug, Clone)]
pub struct VelocitySpace<'m> {
    mesh: &'m SimplicialMesh,
    elements: Vec<BdmElement>,
    essential: Vec<bool>,
}

impl<'m> VelocitySpace<'m> {
    /// `V_h`: normal trace constrained on every boundary face.
    pub fn new(mesh: &'m SimplicialMesh) -> Result<Self> {
        Self::with_natural(mesh, |_| false)
    }

    /// Leave the normal trace free on boundary faces whose tag satisfies
    /// `natural` (do-nothing outlets).
    pub fn with_natural(
        mesh: &'m SimplicialMesh,
        natural: impl Fn(BoundaryTag) -> bool,
    ) -> Result<Self> {
        let elements = (0..mesh.num_elements())
            .map(|t| BdmElement::new(mesh, t))
            .collect::<Result<Vec<_>>>()?;
        let mut essential = vec![false; 2 * mesh.num_faces()];
        for f in mesh.boundary_faces() {
            let tag = mesh.boundary_tag(f).ok_or(Error::MissingBoundaryCondition { face: f })?;
            if !natural(tag) {
                essential[2 * f] = true;
                essential[2 * f + 1] = true;
            }
        }
        Ok(Self {
            mesh,
            elements,
            essential,
        })
    }

    pub fn mesh(&self) -> &'m SimplicialMesh {
        self.mesh
    }

    pub fn dim(&self) -> usize {
        self.essential.len()
    }

    pub fn element(&self, t: usize) -> &BdmElement {
        &self.elements[t]
    }

    /// Global DOFs of element `t` in local order.
    pub fn element_dofs(&self, t: usize) -> [usize; 6] {
        let f = self.mesh.element_faces(t);
        [
            2 * f[0],
            2 * f[0] + 1,
            2 * f[1],
            2 * f[1] + 1,
            2 * f[2],
            2 * f[2] + 1,
        ]
    }

    pub fn is_essential(&self, dof: usize) -> bool {
        self.essential[dof]
    }

    pub fn essential_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&d| self.essential[d])
    }

    pub fn zeros(&self) -> VelocityField {
        VelocityField::zeros(self.dim())
    }

    pub fn bind<'a>(&'a self, field: &'a VelocityField) -> DiscreteVelocity<'a>
    where
        'm: 'a,
    {
        DiscreteVelocity { space: self, field }
    }

    /// Face-moment interpolant: the DOFs of every face are the `P¹(F)`
    /// projection of `v·n_F`. For divergence-free `v` this is the RT¹
    /// interpolant and the result is pointwise divergence-free.
    pub fn rt_interpolate(&self, v: impl Fn(Vec2) -> Vec2) -> VelocityField {
        let rule = EdgeRule::new(10).expect("supported order");
        let mut coeffs = vec![0.0; self.dim()];
        for f in 0..self.mesh.num_faces() {
            let n = self.mesh.face(f).normal;
            let d = face_projection_p1(self.mesh, f, |x| math::dot(v(x), n), &rule);
            coeffs[2 * f] = d[0];
            coeffs[2 * f + 1] = d[1];
        }
        VelocityField(coeffs)
    }

    /// Value at `x` inside element `t` (not checked).
    #[inline]
    pub fn value(&self, u: &VelocityField, t: usize, x: Vec2) -> Vec2 {
        let e = &self.elements[t];
        let dofs = self.element_dofs(t);
        let mut out = [0.0; 2];
        for (k, &d) in dofs.iter().enumerate() {
            let c = u.0[d];
            if c != 0.0 {
                let phi = e.value(k, x);
                out[0] += c * phi[0];
                out[1] += c * phi[1];
            }
        }
        out
    }

    /// Gradient on element `t` (constant for BDM¹).
    pub fn gradient(&self, u: &VelocityField, t: usize) -> Tensor2 {
        let e = &self.elements[t];
        let mut g = [[0.0; 2]; 2];
        for (k, &d) in self.element_dofs(t).iter().enumerate() {
            let c = u.0[d];
            let gk = e.gradient(k);
            for i in 0..2 {
                for j in 0..2 {
                    g[i][j] += c * gk[i][j];
                }
            }
        }
        g
    }

    pub fn divergence(&self, u: &VelocityField, t: usize) -> f64 {
        let g = self.gradient(u, t);
        g[0][0] + g[1][1]
    }

    /// Checked evaluation: value, gradient and divergence at points of `t`.
    pub fn evaluate(
        &self,
        u: &VelocityField,
        t: usize,
        points: &[Vec2],
    ) -> Result<Vec<(Vec2, Tensor2, f64)>> {
        let h = self.mesh.diameter(t);
        points
            .iter()
            .map(|&x| {
                if !self.mesh.contains(t, x, 1e-10 * h.max(1.0)) {
                    return Err(Error::PointOutside {
                        element: t,
                        x: x[0],
                        y: x[1],
                    });
                }
                let g = self.gradient(u, t);
                Ok((self.value(u, t, x), g, g[0][0] + g[1][1]))
            })
            .collect()
    }

    /// `curl ψ = (∂_y ψ, −∂_x ψ)` of the continuous `P¹` stream function
    /// with vertex values `psi`. The result is exactly divergence-free, and
    /// its normal trace vanishes on faces where `ψ` is constant.
    pub fn discrete_curl(&self, psi: &[f64]) -> VelocityField {
        let mut coeffs = vec![0.0; self.dim()];
        for (f, face) in self.mesh.faces().iter().enumerate() {
            let [a, b] = face.vertices;
            let va = self.mesh.vertices()[a];
            let vb = self.mesh.vertices()[b];
            // curl ψ · n = ∂_s ψ when n is the tangent turned clockwise.
            let tangent = math::sub(vb, va);
            let sign = math::dot(face.normal, [tangent[1], -tangent[0]]).signum();
            coeffs[2 * f] = sign * (psi[b] - psi[a]) / face.length;
        }
        VelocityField(coeffs)
    }

    /// `max_T |∇·u|`.
    pub fn max_divergence(&self, u: &VelocityField) -> f64 {
        (0..self.mesh.num_elements())
            .map(|t| self.divergence(u, t).abs())
            .fold(0.0, f64::max)
    }

    /// Normal trace `u·n_F` at parameter `s` (single-valued).
    pub fn normal_trace(&self, u: &VelocityField, f: usize, s: f64) -> f64 {
        u.0[2 * f] + u.0[2 * f + 1] * (2.0 * s - 1.0)
    }

    /// Net outward flux through boundary face `f`.
    pub fn boundary_flux(&self, u: &VelocityField, f: usize) -> f64 {
        debug_assert!(!self.mesh.face(f).is_interior());
        u.0[2 * f] * self.mesh.face(f).length
    }
}

/// Jump and average of a field at one face point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    pub s: f64,
    pub x: Vec2,
    pub jump: Vec2,
    pub average: Vec2,
}

/// `[[v]]` and `{{v}}` at the points `s` of face `f`. On boundary faces both
/// equal the one-sided trace.
pub fn face_trace<F: PiecewiseField + ?Sized>(
    mesh: &SimplicialMesh,
    field: &F,
    f: usize,
    params: &[f64],
) -> Vec<Trace> {
    let face = mesh.face(f);
    params
        .iter()
        .map(|&s| {
            let x = mesh.face_point(f, s);
            let v1 = field.value(face.first, x);
            match face.second {
                Some(t2) => {
                    let v2 = field.value(t2, x);
                    Trace {
                        s,
                        x,
                        jump: math::sub(v1, v2),
                        average: math::scale(0.5, math::add(v1, v2)),
                    }
                }
                None => Trace {
                    s,
                    x,
                    jump: v1,
                    average: v1,
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PressureSpace<'m> {
    mesh: &'m SimplicialMesh,
}

impl<'m> PressureSpace<'m> {
    pub fn new(mesh: &'m SimplicialMesh) -> Self {
        Self { mesh }
    }

    pub fn dim(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn zeros(&self) -> PressureField {
        PressureField::zeros(self.dim())
    }

    /// `|Ω|⁻¹ ∫_Ω p`.
    pub fn mean(&self, p: &PressureField) -> f64 {
        let m = self.mesh;
        let total: f64 = (0..m.num_elements()).map(|t| m.area(t) * p.0[t]).sum();
        total / m.total_area()
    }

    pub fn remove_mean(&self, p: &mut PressureField) {
        let mean = self.mean(p);
        p.0.iter_mut().for_each(|v| *v -= mean);
    }

    /// Elementwise `L²` projection of `g`.
    pub fn project(&self, g: impl Fn(Vec2) -> f64, rule: &crate::quadrature::TriangleRule) -> PressureField {
        let m = self.mesh;
        let values = (0..m.num_elements())
            .map(|t| {
                let tri = m.element_points(t);
                let s: f64 = rule.on_triangle(&tri, m.area(t)).map(|(_, x, w)| w * g(x)).sum();
                s / m.area(t)
            })
            .collect();
        PressureField(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Rectangle, StructuredMesh};
    use crate::quadrature::TriangleRule;

    fn mesh(n: usize) -> SimplicialMesh {
        StructuredMesh::new(n, Rectangle::UNIT_SQUARE)
            .jitter(0.15, 5)
            .build()
            .unwrap()
    }

    #[test]
    fn constant_field_is_reproduced() {
        let m = mesh(3);
        let v = VelocitySpace::new(&m).unwrap();
        let u = v.rt_interpolate(|_| [1.0, 0.0]);
        let rule = TriangleRule::new(4).unwrap();
        for t in 0..m.num_elements() {
            let tri = m.element_points(t);
            for (_, x, _) in rule.on_triangle(&tri, m.area(t)) {
                let val = v.value(&u, t, x);
                assert!((val[0] - 1.0).abs() < 1e-13 && val[1].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn curl_field_interpolates_divergence_free() {
        let m = mesh(4);
        let v = VelocitySpace::new(&m).unwrap();
        // curl of ψ = x²y.
        let u = v.rt_interpolate(|x| [x[0] * x[0], -2.0 * x[0] * x[1]]);
        assert!(v.max_divergence(&u) < 1e-12);
    }

    #[test]
    fn zero_coefficients_evaluate_to_zero() {
        let m = mesh(2);
        let v = VelocitySpace::new(&m).unwrap();
        let u = v.zeros();
        let vals = v.evaluate(&u, 0, &[m.centroid(0)]).unwrap();
        assert_eq!(vals[0].0, [0.0, 0.0]);
    }

    #[test]
    fn evaluation_outside_element_fails() {
        let m = mesh(2);
        let v = VelocitySpace::new(&m).unwrap();
        let u = v.zeros();
        let err = v.evaluate(&u, 0, &[[5.0, 5.0]]);
        assert!(matches!(err, Err(Error::PointOutside { .. })));
    }

    #[test]
    fn interpolation_is_a_projection() {
        let m = mesh(3);
        let v = VelocitySpace::new(&m).unwrap();
        let u = v.rt_interpolate(|x| [math::sin(3.0 * x[1]), x[0] * x[1]]);
        // Re-interpolating the discrete field needs the element it lives on;
        // face moments only see traces, which are single-valued in the normal
        // direction.
        let mut again = vec![0.0; v.dim()];
        let rule = EdgeRule::new(6).unwrap();
        for f in 0..m.num_faces() {
            let face = m.face(f);
            let d = face_projection_p1(
                &m,
                f,
                |x| math::dot(v.value(&u, face.first, x), face.normal),
                &rule,
            );
            again[2 * f] = d[0];
            again[2 * f + 1] = d[1];
        }
        for (a, b) in again.iter().zip(u.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_jumps_vanish() {
        let m = mesh(4);
        let v = VelocitySpace::new(&m).unwrap();
        let u = VelocityField((0..v.dim()).map(|i| math::sin(i as f64 * 1.7)).collect());
        let field = v.bind(&u);
        for f in m.interior_faces() {
            for tr in face_trace(&m, &field, f, &[0.0, 0.21, 0.5, 1.0]) {
                assert!(math::dot(tr.jump, m.face(f).normal).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn continuous_field_has_no_jump() {
        let m = mesh(3);
        let field = AnalyticField {
            value: |x: Vec2| [x[0] + 2.0 * x[1], x[0] * x[1]],
            gradient: |x: Vec2| [[1.0, 2.0], [x[1], x[0]]],
        };
        for f in m.interior_faces() {
            for tr in face_trace(&m, &field, f, &[0.1, 0.9]) {
                assert!(math::norm(tr.jump) < 1e-12);
            }
        }
    }

    #[test]
    fn piecewise_constant_jump_follows_orientation() {
        let m = crate::mesh::build_structured_mesh(1, Rectangle::UNIT_SQUARE).unwrap();
        struct Pc;
        impl PiecewiseField for Pc {
            fn value(&self, t: usize, _x: Vec2) -> Vec2 {
                if t == 0 {
                    [1.0, 0.0]
                } else {
                    [0.0, 0.0]
                }
            }
            fn gradient(&self, _t: usize, _x: Vec2) -> Tensor2 {
                [[0.0; 2]; 2]
            }
        }
        let f = m.interior_faces().next().unwrap();
        assert_eq!(m.face(f).first, 0);
        let tr = face_trace(&m, &Pc, f, &[0.5]);
        assert_eq!(tr[0].jump, [1.0, 0.0]);
        assert_eq!(tr[0].average, [0.5, 0.0]);
        let b = m.boundary_faces().find(|&b| m.face(b).first == 0).unwrap();
        let tr = face_trace(&m, &Pc, b, &[0.5]);
        assert_eq!(tr[0].jump, [1.0, 0.0]);
        assert_eq!(tr[0].average, [1.0, 0.0]);
    }

    #[test]
    fn pressure_mean_removal() {
        let m = mesh(3);
        let q = PressureSpace::new(&m);
        let rule = TriangleRule::new(4).unwrap();
        let mut p = q.project(|x| 1.0 + x[0], &rule);
        q.remove_mean(&mut p);
        assert!(q.mean(&p).abs() < 1e-15);
    }
}
