//! Face-jump liftings into broken `P¹` tensors and the discrete gradient
//! `G_h v = ∇_h v − R_h v`.
//!
//! On an element `T ∈ T_F`, the lifting of face data `w` is
//! `r_F(w)|_T = α L_T(w) ⊗ n_F` where `L_T(g) ∈ P¹(T)` solves
//! `∫_T L_T(g) φ = ∫_F g φ` for all `φ ∈ P¹(T)` and `α = ½` on interior
//! faces, `1` on boundary faces. Tensors are stored in the barycentric nodal
//! basis of each element.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, Tensor2, Vec2};
use crate::mesh::SimplicialMesh;
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::spaces::{PiecewiseField, VelocityField, VelocitySpace};

/// A `P¹` tensor on one element: `Σ_l λ_l nodes[l]`.
pub type P1Tensor = [Tensor2; 3];

const ZERO_P1: P1Tensor = [[[0.0; 2]; 2]; 3];

#[inline]
pub fn eval_p1(nodes: &P1Tensor, lambda: [f64; 3]) -> Tensor2 {
    let mut out = [[0.0; 2]; 2];
    for (n, l) in nodes.iter().zip(lambda) {
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += l * n[i][j];
            }
        }
    }
    out
}

/// Per-element `P¹` tensor coefficients over the whole mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokenTensorField(pub Vec<P1Tensor>);

impl BrokenTensorField {
    pub fn zeros(num_elements: usize) -> Self {
        Self(vec![ZERO_P1; num_elements])
    }

    pub fn eval(&self, mesh: &SimplicialMesh, t: usize, x: Vec2) -> Tensor2 {
        eval_p1(&self.0[t], mesh.barycentric(t, x))
    }

    pub fn add_assign(&mut self, other: &BrokenTensorField) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for l in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        a[l][i][j] += b[l][i][j];
                    }
                }
            }
        }
    }

    /// Elements where the field is not identically zero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len())
            .filter(|&t| self.0[t].iter().flatten().flatten().any(|v| *v != 0.0))
            .collect()
    }

    /// `‖·‖²_{L²(Ω)}`, exact for `P¹` tensors.
    pub fn l2_norm_squared(&self, mesh: &SimplicialMesh) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(t, nodes)| {
                // P¹ mass matrix |T|/12 (1 + δ_lm).
                let mut s = 0.0;
                for l in 0..3 {
                    for m in 0..3 {
                        let w = if l == m { 2.0 } else { 1.0 };
                        s += w * math::frobenius(&nodes[l], &nodes[m]);
                    }
                }
                s * mesh.area(t) / 12.0
            })
            .sum()
    }
}

/// Solve `∫_T L φ_l = b_l` with the exact `P¹` mass matrix.
#[inline]
fn apply_inverse_mass(area: f64, b: [f64; 3]) -> [f64; 3] {
    // M = |T|/12 (I + 11ᵀ)  ⇒  M⁻¹ = 12/|T| (I − 11ᵀ/4).
    let quarter_sum = 0.25 * (b[0] + b[1] + b[2]);
    let s = 12.0 / area;
    [s * (b[0] - quarter_sum), s * (b[1] - quarter_sum), s * (b[2] - quarter_sum)]
}

fn averaging_factor(mesh: &SimplicialMesh, f: usize) -> f64 {
    if mesh.face(f).is_interior() {
        0.5
    } else {
        1.0
    }
}

/// `r_F(w)`: the lifting of the face data `w` of face `f`, integrated with
/// `rule`. Zero outside `ω_F`.
pub fn lift_face(
    mesh: &SimplicialMesh,
    f: usize,
    w: impl Fn(Vec2) -> Vec2,
    rule: &EdgeRule,
) -> BrokenTensorField {
    let mut out = BrokenTensorField::zeros(mesh.num_elements());
    let face = mesh.face(f);
    let alpha = averaging_factor(mesh, f);
    let n = face.normal;
    for t in face.elements() {
        let mut b = [[0.0; 3]; 2];
        for (s, wq) in rule.points.iter().zip(rule.physical_weights(face.length)) {
            let x = mesh.face_point(f, *s);
            let lam = mesh.barycentric(t, x);
            let wx = w(x);
            for i in 0..2 {
                for l in 0..3 {
                    b[i][l] += wq * wx[i] * lam[l];
                }
            }
        }
        for i in 0..2 {
            let c = apply_inverse_mass(mesh.area(t), b[i]);
            for l in 0..3 {
                for j in 0..2 {
                    out.0[t][l][i][j] = alpha * c[l] * n[j];
                }
            }
        }
    }
    out
}

/// `R_h v = Σ_F r_F([[v]])` over the faces selected by `include`.
pub fn global_lifting<F: PiecewiseField + ?Sized>(
    mesh: &SimplicialMesh,
    field: &F,
    include: impl Fn(usize) -> bool,
    rule: &EdgeRule,
) -> BrokenTensorField {
    let mut out = BrokenTensorField::zeros(mesh.num_elements());
    for f in (0..mesh.num_faces()).filter(|&f| include(f)) {
        let face = mesh.face(f);
        let r = lift_face(
            mesh,
            f,
            |x| {
                let v1 = field.value(face.first, x);
                match face.second {
                    Some(t2) => math::sub(v1, field.value(t2, x)),
                    None => v1,
                }
            },
            rule,
        );
        out.add_assign(&r);
    }
    out
}

/// `G_h v` for an arbitrary piecewise-smooth field, evaluated pointwise.
pub struct DiscreteGradientField<'a, F: ?Sized> {
    pub mesh: &'a SimplicialMesh,
    pub field: &'a F,
    pub lifting: BrokenTensorField,
}

impl<'a, F: PiecewiseField + ?Sized> DiscreteGradientField<'a, F> {
    pub fn new(
        mesh: &'a SimplicialMesh,
        field: &'a F,
        include: impl Fn(usize) -> bool,
        rule: &EdgeRule,
    ) -> Self {
        let lifting = global_lifting(mesh, field, include, rule);
        Self {
            mesh,
            field,
            lifting,
        }
    }

    pub fn eval(&self, t: usize, x: Vec2) -> Tensor2 {
        math::tensor_sub(&self.field.gradient(t, x), &self.lifting.eval(self.mesh, t, x))
    }
}

/// Convenience: `G_h v` for every face lifted.
pub fn discrete_gradient<'a, F: PiecewiseField + ?Sized>(
    mesh: &'a SimplicialMesh,
    field: &'a F,
    rule: &EdgeRule,
) -> DiscreteGradientField<'a, F> {
    DiscreteGradientField::new(mesh, field, |_| true, rule)
}

/// Precomputed linear map from velocity DOFs to `G_h v` on every element.
///
/// `G_h v|_T` depends on the DOFs of `T` and of its face neighbors (at most
/// 18 DOFs); for each of them the map stores its `P¹` tensor contribution.
#[derive(Debug, Clone)]
pub struct DiscreteGradient {
    stencils: Vec<Vec<usize>>,
    maps: Vec<Vec<P1Tensor>>,
    lifted: Vec<bool>,
}

/// Two-point Gauss rule on `[0, 1]`; exact for the quadratic integrands of
/// the lifting right-hand sides.
const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

impl DiscreteGradient {
    /// Lift the jumps of all faces.
    pub fn new(space: &VelocitySpace) -> Self {
        Self::with_faces(space, |_| true)
    }

    /// Lift only the jumps of faces selected by `include`.
    pub fn with_faces(space: &VelocitySpace, include: impl Fn(usize) -> bool) -> Self {
        let mesh = space.mesh();
        let lifted: Vec<bool> = (0..mesh.num_faces()).map(include).collect();
        let mut stencils = Vec::with_capacity(mesh.num_elements());
        let mut maps = Vec::with_capacity(mesh.num_elements());
        for t in 0..mesh.num_elements() {
            let mut stencil: Vec<usize> = space.element_dofs(t).to_vec();
            let mut map: Vec<P1Tensor> = vec![ZERO_P1; 6];
            let g = space.element(t);
            for k in 0..6 {
                let grad = g.gradient(k);
                map[k] = [grad; 3];
            }
            for f in mesh.element_faces(t) {
                if !lifted[f] {
                    continue;
                }
                let face = mesh.face(f);
                let alpha = averaging_factor(mesh, f);
                let n = face.normal;
                // Jump contributions: +φ on the first element, −φ on the second.
                for (side, te) in face.elements().enumerate() {
                    let sign = if side == 0 { 1.0 } else { -1.0 };
                    let dofs = space.element_dofs(te);
                    let elem = space.element(te);
                    for k in 0..6 {
                        let mut b = [[0.0; 3]; 2];
                        for s in GAUSS2 {
                            let x = mesh.face_point(f, s);
                            let lam = mesh.barycentric(t, x);
                            let phi = elem.value(k, x);
                            let wq = 0.5 * face.length * sign;
                            for c in 0..2 {
                                for l in 0..3 {
                                    b[c][l] += wq * phi[c] * lam[l];
                                }
                            }
                        }
                        let pos = match stencil.iter().position(|&d| d == dofs[k]) {
                            Some(p) => p,
                            None => {
                                stencil.push(dofs[k]);
                                map.push(ZERO_P1);
                                stencil.len() - 1
                            }
                        };
                        for c in 0..2 {
                            let coef = apply_inverse_mass(mesh.area(t), b[c]);
                            for l in 0..3 {
                                for j in 0..2 {
                                    map[pos][l][c][j] -= alpha * coef[l] * n[j];
                                }
                            }
                        }
                    }
                }
            }
            stencils.push(stencil);
            maps.push(map);
        }
        Self {
            stencils,
            maps,
            lifted,
        }
    }

    pub fn is_lifted(&self, f: usize) -> bool {
        self.lifted[f]
    }

    /// Global DOFs `G_h v|_T` depends on.
    pub fn stencil(&self, t: usize) -> &[usize] {
        &self.stencils[t]
    }

    /// Contribution of each stencil DOF to `G_h v|_T`.
    pub fn element_map(&self, t: usize) -> &[P1Tensor] {
        &self.maps[t]
    }

    pub fn element(&self, u: &VelocityField, t: usize) -> P1Tensor {
        let mut out = ZERO_P1;
        for (&d, m) in self.stencils[t].iter().zip(&self.maps[t]) {
            let c = u.0[d];
            if c == 0.0 {
                continue;
            }
            for l in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        out[l][i][j] += c * m[l][i][j];
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, u: &VelocityField) -> BrokenTensorField {
        BrokenTensorField((0..self.stencils.len()).map(|t| self.element(u, t)).collect())
    }

    /// `R_h v = ∇_h v − G_h v`.
    pub fn lifting(&self, space: &VelocitySpace, u: &VelocityField) -> BrokenTensorField {
        let mut g = self.apply(u);
        for (t, nodes) in g.0.iter_mut().enumerate() {
            let grad = space.gradient(u, t);
            for node in nodes.iter_mut() {
                *node = math::tensor_sub(&grad, node);
            }
        }
        g
    }
}

/// `∫_Ω r : τ` against the per-element basis tensor `(node l, entry ij)`,
/// by quadrature. Used to verify liftings against their defining identity.
pub fn tensor_moment(
    mesh: &SimplicialMesh,
    field: &BrokenTensorField,
    t: usize,
    l: usize,
    ij: (usize, usize),
    rule: &TriangleRule,
) -> f64 {
    let tri = mesh.element_points(t);
    rule.on_triangle(&tri, mesh.area(t))
        .map(|(lam, _, w)| w * eval_p1(&field.0[t], lam)[ij.0][ij.1] * lam[l])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, Rectangle, StructuredMesh};
    use crate::spaces::{AnalyticField, DiscreteVelocity};

    fn jittered(n: usize) -> SimplicialMesh {
        StructuredMesh::new(n, Rectangle::UNIT_SQUARE)
            .jitter(0.2, 13)
            .build()
            .unwrap()
    }

    /// Right-hand side of the defining identity for the basis tensor that is
    /// `λ_l` in entry `ij` on element `t` and zero elsewhere:
    /// `∫_F w · ({{τ}} n_F)`.
    fn face_side(
        mesh: &SimplicialMesh,
        f: usize,
        w: &dyn Fn(Vec2) -> Vec2,
        t: usize,
        l: usize,
        ij: (usize, usize),
    ) -> f64 {
        let face = mesh.face(f);
        if !face.elements().any(|e| e == t) {
            return 0.0;
        }
        let alpha = averaging_factor(mesh, f);
        let rule = EdgeRule::new(8).unwrap();
        rule.points
            .iter()
            .zip(rule.physical_weights(face.length))
            .map(|(s, wq)| {
                let x = mesh.face_point(f, *s);
                let lam = mesh.barycentric(t, x)[l];
                wq * alpha * w(x)[ij.0] * lam * face.normal[ij.1]
            })
            .sum()
    }

    #[test]
    fn zero_data_lifts_to_zero() {
        let m = jittered(2);
        let r = lift_face(&m, 3, |_| [0.0, 0.0], &EdgeRule::new(4).unwrap());
        assert!(r.support().is_empty());
    }

    #[test]
    fn defining_identity_on_two_triangles() {
        let m = build_structured_mesh(1, Rectangle::UNIT_SQUARE).unwrap();
        let f = m.interior_faces().next().unwrap();
        let rule = EdgeRule::new(4).unwrap();
        let w = |_: Vec2| [1.0, 0.0];
        let r = lift_face(&m, f, w, &rule);
        let tri_rule = TriangleRule::new(4).unwrap();
        for t in 0..2 {
            for l in 0..3 {
                for ij in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let lhs = tensor_moment(&m, &r, t, l, ij, &tri_rule);
                    let rhs = face_side(&m, f, &w, t, l, ij);
                    assert!((lhs - rhs).abs() < 1e-14, "t={t} l={l} {ij:?}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn boundary_face_uses_full_trace() {
        let m = jittered(2);
        let f = m.boundary_faces().next().unwrap();
        let w = |x: Vec2| [x[0] - 2.0 * x[1], 1.0 + x[1]];
        let r = lift_face(&m, f, w, &EdgeRule::new(4).unwrap());
        let t = m.face(f).first;
        assert_eq!(r.support(), vec![t]);
        let tri_rule = TriangleRule::new(4).unwrap();
        for l in 0..3 {
            for ij in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let lhs = tensor_moment(&m, &r, t, l, ij, &tri_rule);
                let rhs = face_side(&m, f, &w, t, l, ij);
                assert!((lhs - rhs).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn precomputed_gradient_matches_pointwise_lifting() {
        let m = jittered(3);
        let space = VelocitySpace::new(&m).unwrap();
        let u = VelocityField((0..space.dim()).map(|i| math::cos(0.37 * i as f64)).collect());
        let op = DiscreteGradient::new(&space);
        let field = DiscreteVelocity {
            space: &space,
            field: &u,
        };
        let rule = EdgeRule::new(4).unwrap();
        let reference = discrete_gradient(&m, &field, &rule);
        let g = op.apply(&u);
        for t in 0..m.num_elements() {
            for x in m.element_points(t) {
                let a = g.eval(&m, t, x);
                let b = reference.eval(t, x);
                assert!(math::tensor_norm(&math::tensor_sub(&a, &b)) < 1e-11);
            }
        }
    }

    #[test]
    fn smooth_compact_field_has_exact_discrete_gradient() {
        let m = jittered(3);
        // Vanishes on ∂Ω and is continuous, so every jump is zero.
        let field = AnalyticField {
            value: |x: Vec2| {
                let b = x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
                [b, 2.0 * b]
            },
            gradient: |x: Vec2| {
                let bx = (1.0 - 2.0 * x[0]) * x[1] * (1.0 - x[1]);
                let by = x[0] * (1.0 - x[0]) * (1.0 - 2.0 * x[1]);
                [[bx, by], [2.0 * bx, 2.0 * by]]
            },
        };
        let g = discrete_gradient(&m, &field, &EdgeRule::new(6).unwrap());
        for t in 0..m.num_elements() {
            let c = m.centroid(t);
            let d = math::tensor_sub(&g.eval(t, c), &field.gradient(t, c));
            assert!(math::tensor_norm(&d) < 1e-12);
        }
    }

    #[test]
    fn single_jump_global_lifting_equals_face_lifting() {
        let m = jittered(2);
        let f = m.interior_faces().nth(2).unwrap();
        let t1 = m.face(f).first;
        struct OneSided(usize);
        impl PiecewiseField for OneSided {
            // Constant (1, 0) on one element and zero elsewhere.
            fn value(&self, t: usize, _x: Vec2) -> Vec2 {
                if t == self.0 {
                    [1.0, 0.0]
                } else {
                    [0.0, 0.0]
                }
            }
            fn gradient(&self, _t: usize, _x: Vec2) -> Tensor2 {
                [[0.0; 2]; 2]
            }
        }
        let rule = EdgeRule::new(4).unwrap();
        let field = OneSided(t1);
        let global = global_lifting(&m, &field, |g| g == f, &rule);
        let local = lift_face(&m, f, |_| [1.0, 0.0], &rule);
        for t in 0..m.num_elements() {
            for l in 0..3 {
                let d = math::tensor_sub(&global.0[t][l], &local.0[t][l]);
                assert!(math::tensor_norm(&d) < 1e-14);
            }
        }
    }
}
