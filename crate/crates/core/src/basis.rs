//! Element bases: scalar `P^m` on elements and faces, and the lowest-order
//! Brezzi–Douglas–Marini vector basis.
//!
//! BDM¹ degrees of freedom on a face `F` are the Legendre coefficients of
//! the normal trace: `v·n_F = d₀ + d₁ (2s − 1)` with `s` the global face
//! parameter. Equivalently `d₀ = |F|⁻¹ ∫_F v·n_F` and
//! `d₁ = 3|F|⁻¹ ∫_F v·n_F (2s − 1)`. Both elements sharing a face use the same
//! `n_F` and `s`, so normal traces are single-valued by construction.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseLu;
use crate::math::{self, Tensor2, Vec2};
use crate::mesh::SimplicialMesh;
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::{Error, Result};

/// An affine vector field `x ↦ value + grad (x − center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineVector {
    pub center: Vec2,
    pub value: Vec2,
    pub grad: Tensor2,
}

impl AffineVector {
    #[inline]
    pub fn eval(&self, x: Vec2) -> Vec2 {
        let d = math::sub(x, self.center);
        math::add(self.value, math::mat_vec(&self.grad, d))
    }

    #[inline]
    pub fn divergence(&self) -> f64 {
        self.grad[0][0] + self.grad[1][1]
    }
}

/// The six BDM¹ shape functions of one element, dual to its face moments.
/// Local DOF `2i + j` is moment `j` on local face `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BdmElement {
    pub functions: [AffineVector; 6],
}

impl BdmElement {
    pub fn new(mesh: &SimplicialMesh, t: usize) -> Result<Self> {
        let center = mesh.centroid(t);
        let h = mesh.diameter(t);
        // Scaled monomials (1,0), (ξ,0), (η,0), (0,1), (0,ξ), (0,η).
        let monomial = |j: usize, x: Vec2| -> Vec2 {
            let xi = (x[0] - center[0]) / h;
            let eta = (x[1] - center[1]) / h;
            let s = [1.0, xi, eta][j % 3];
            if j < 3 {
                [s, 0.0]
            } else {
                [0.0, s]
            }
        };
        let mut dofs = [0.0; 36];
        for j in 0..6 {
            let m = face_moments(mesh, t, |x| monomial(j, x));
            for (i, d) in m.iter().enumerate() {
                dofs[i * 6 + j] = *d;
            }
        }
        let lu = DenseLu::new(&dofs, 6).ok_or(Error::SingularLocalMatrix(t))?;
        let coeffs = lu.inverse();
        let functions = core::array::from_fn(|k| {
            let c = |j: usize| coeffs[j * 6 + k];
            AffineVector {
                center,
                value: [c(0), c(3)],
                grad: [[c(1) / h, c(2) / h], [c(4) / h, c(5) / h]],
            }
        });
        Ok(Self { functions })
    }

    #[inline]
    pub fn value(&self, k: usize, x: Vec2) -> Vec2 {
        self.functions[k].eval(x)
    }

    #[inline]
    pub fn gradient(&self, k: usize) -> Tensor2 {
        self.functions[k].grad
    }

    #[inline]
    pub fn divergence(&self, k: usize) -> f64 {
        self.functions[k].divergence()
    }
}

/// The six normal moments of `v` on the faces of element `t`, in local DOF
/// order. Exact for quadratic normal traces.
pub fn face_moments(mesh: &SimplicialMesh, t: usize, v: impl Fn(Vec2) -> Vec2) -> [f64; 6] {
    face_moments_with(mesh, t, v, &GAUSS2)
}

const GAUSS2: ([f64; 2], [f64; 2]) = {
    // 0.5 ∓ 0.5/√3
    let d = 0.288_675_134_594_812_9;
    ([0.5 - d, 0.5 + d], [0.5, 0.5])
};

fn face_moments_with(
    mesh: &SimplicialMesh,
    t: usize,
    v: impl Fn(Vec2) -> Vec2,
    rule: &([f64; 2], [f64; 2]),
) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, f) in mesh.element_faces(t).into_iter().enumerate() {
        let n = mesh.face(f).normal;
        for (s, w) in rule.0.iter().zip(&rule.1) {
            let vn = math::dot(v(mesh.face_point(f, *s)), n);
            out[2 * i] += w * vn;
            out[2 * i + 1] += 3.0 * w * vn * (2.0 * s - 1.0);
        }
    }
    out
}

/// Legendre coefficients `(d₀, d₁)` of the `L²(F)` projection onto `P¹(F)`
/// of `g`, using `rule` for the moments.
pub fn face_projection_p1(
    mesh: &SimplicialMesh,
    f: usize,
    g: impl Fn(Vec2) -> f64,
    rule: &EdgeRule,
) -> [f64; 2] {
    let mut d = [0.0; 2];
    for (s, w) in rule.points.iter().zip(&rule.weights) {
        let gv = g(mesh.face_point(f, *s));
        d[0] += w * gv;
        d[1] += 3.0 * w * gv * (2.0 * s - 1.0);
    }
    d
}

/// Where a scalar polynomial basis lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Element(usize),
    Face(usize),
}

/// Monomial basis of `P^m` on an element (in centered, diameter-scaled
/// coordinates) or on a face (powers of `2s − 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBasis {
    degree: usize,
    region: Region,
    center: Vec2,
    scale: f64,
    tangent: Vec2,
}

impl ScalarBasis {
    pub fn new(mesh: &SimplicialMesh, region: Region, degree: usize) -> Self {
        let (center, scale, tangent) = match region {
            Region::Element(t) => (mesh.centroid(t), mesh.diameter(t), [0.0, 0.0]),
            Region::Face(f) => {
                let face = mesh.face(f);
                let d = math::sub(mesh.face_point(f, 1.0), mesh.face_point(f, 0.0));
                (mesh.face_midpoint(f), face.length, math::scale(1.0 / face.length, d))
            }
        };
        Self {
            degree,
            region,
            center,
            scale,
            tangent,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn dim(&self) -> usize {
        let m = self.degree;
        match self.region {
            Region::Element(_) => (m + 1) * (m + 2) / 2,
            Region::Face(_) => m + 1,
        }
    }

    /// Values of all basis functions at the physical point `x` (for faces
    /// the point is projected onto the face line).
    pub fn values(&self, x: Vec2) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        let xi = (x[0] - self.center[0]) / self.scale;
        let eta = (x[1] - self.center[1]) / self.scale;
        match self.region {
            Region::Element(_) => {
                for total in 0..=self.degree {
                    for b in 0..=total {
                        let a = total - b;
                        out.push(powi(xi, a) * powi(eta, b));
                    }
                }
            }
            Region::Face(_) => {
                // 2s − 1 = 2 (x − mid)·τ / |F| with τ the face tangent.
                let tau = self.tangent;
                let u = 2.0 * (xi * tau[0] + eta * tau[1]);
                for p in 0..=self.degree {
                    out.push(powi(u, p));
                }
            }
        }
        out
    }

    /// Gradients of all basis functions (elements only).
    pub fn gradients(&self, x: Vec2) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(self.dim());
        let xi = (x[0] - self.center[0]) / self.scale;
        let eta = (x[1] - self.center[1]) / self.scale;
        for total in 0..=self.degree {
            for b in 0..=total {
                let a = total - b;
                let dx = if a > 0 { a as f64 * powi(xi, a - 1) * powi(eta, b) } else { 0.0 };
                let dy = if b > 0 { b as f64 * powi(xi, a) * powi(eta, b - 1) } else { 0.0 };
                out.push([dx / self.scale, dy / self.scale]);
            }
        }
        out
    }
}

fn powi(x: f64, p: usize) -> f64 {
    (0..p).fold(1.0, |acc, _| acc * x)
}

/// Coefficients of an `L²` projection in a [`ScalarBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub basis: ScalarBasis,
    pub coeffs: Vec<f64>,
}

impl Projection {
    pub fn eval(&self, x: Vec2) -> f64 {
        self.basis
            .values(x)
            .iter()
            .zip(&self.coeffs)
            .map(|(b, c)| b * c)
            .sum()
    }
}

/// `π^m_{0,Y} f` on an element or face.
pub fn l2_project(
    mesh: &SimplicialMesh,
    degree: usize,
    f: impl Fn(Vec2) -> f64,
    region: Region,
) -> Result<Projection> {
    let basis = ScalarBasis::new(mesh, region, degree);
    let n = basis.dim();
    let mut mass = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let order = (2 * degree + 8).min(crate::quadrature::MAX_ORDER);
    let mut accumulate = |x: Vec2, w: f64| {
        let phi = basis.values(x);
        let fx = f(x);
        for i in 0..n {
            rhs[i] += w * fx * phi[i];
            for j in 0..n {
                mass[i * n + j] += w * phi[i] * phi[j];
            }
        }
    };
    match region {
        Region::Element(t) => {
            let rule = TriangleRule::new(order)?;
            let tri = mesh.element_points(t);
            for (_, x, w) in rule.on_triangle(&tri, mesh.area(t)) {
                accumulate(x, w);
            }
        }
        Region::Face(fi) => {
            let rule = EdgeRule::new(order)?;
            let len = mesh.face(fi).length;
            for (s, w) in rule.points.iter().zip(rule.physical_weights(len)) {
                accumulate(mesh.face_point(fi, *s), w);
            }
        }
    }
    let id = match region {
        Region::Element(t) => t,
        Region::Face(f) => f,
    };
    let lu = DenseLu::new(&mass, n).ok_or(Error::SingularLocalMatrix(id))?;
    let coeffs = lu.solve(&rhs);
    Ok(Projection { basis, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Rectangle, StructuredMesh};

    fn mesh() -> SimplicialMesh {
        StructuredMesh::new(3, Rectangle::UNIT_SQUARE)
            .jitter(0.2, 11)
            .build()
            .unwrap()
    }

    #[test]
    fn bdm_duality_is_identity() {
        let m = mesh();
        for t in 0..m.num_elements() {
            let e = BdmElement::new(&m, t).unwrap();
            for k in 0..6 {
                let dofs = face_moments(&m, t, |x| e.value(k, x));
                for (i, d) in dofs.iter().enumerate() {
                    let expect = if i == k { 1.0 } else { 0.0 };
                    assert!((d - expect).abs() < 1e-12, "t={t} k={k} i={i}: {d}");
                }
            }
        }
    }

    #[test]
    fn bdm_divergence_is_constant() {
        // Affine fields have constant divergence; check it against the flux
        // balance ∫_T div φ = Σ_F ±∫_F φ·n_F = Σ_F ±|F| d₀.
        let m = mesh();
        for t in 0..m.num_elements() {
            let e = BdmElement::new(&m, t).unwrap();
            for k in 0..6 {
                let i = k / 2;
                let f = m.element_faces(t)[i];
                let flux = if k % 2 == 0 {
                    m.element_face_sign(t, i) * m.face(f).length
                } else {
                    0.0
                };
                assert!((e.divergence(k) * m.area(t) - flux).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let m = mesh();
        let p = l2_project(&m, 0, |_| 3.0, Region::Element(2)).unwrap();
        assert!((p.coeffs[0] - 3.0).abs() < 1e-14);
        let f = 4;
        let p = l2_project(&m, 1, |x| x[0], Region::Face(f)).unwrap();
        for s in [0.0, 0.3, 1.0] {
            let x = m.face_point(f, s);
            assert!((p.eval(x) - x[0]).abs() < 1e-12);
        }
        let p = l2_project(&m, 2, |x| x[0] * x[1] - x[1] * x[1], Region::Element(5)).unwrap();
        let c = m.centroid(5);
        assert!((p.eval(c) - (c[0] * c[1] - c[1] * c[1])).abs() < 1e-12);
    }

    #[test]
    fn projection_residual_is_orthogonal() {
        let m = mesh();
        let t = 7;
        let f = |x: Vec2| math::sin(math::PI * x[0]);
        let p = l2_project(&m, 1, f, Region::Element(t)).unwrap();
        let rule = TriangleRule::new(14).unwrap();
        let tri = m.element_points(t);
        let mut moments = [0.0; 3];
        for (_, x, w) in rule.on_triangle(&tri, m.area(t)) {
            let r = f(x) - p.eval(x);
            for (mo, b) in moments.iter_mut().zip(p.basis.values(x)) {
                *mo += w * r * b;
            }
        }
        assert!(moments.iter().all(|v| v.abs() < 1e-12), "{moments:?}");
    }

    #[test]
    fn dimensions() {
        let m = mesh();
        for d in 0..4 {
            assert_eq!(ScalarBasis::new(&m, Region::Element(0), d).dim(), (d + 1) * (d + 2) / 2);
            assert_eq!(ScalarBasis::new(&m, Region::Face(0), d).dim(), d + 1);
        }
        // Partition of unity of the constant subspace.
        let b = ScalarBasis::new(&m, Region::Element(0), 0);
        assert_eq!(b.values(m.centroid(3)), vec![1.0]);
    }
}
