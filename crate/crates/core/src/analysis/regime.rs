//! Classification of elements and faces into convection- and
//! diffusion-dominated.

use alloc::vec::Vec;

use crate::math::{self, Tensor2, Vec2};
use crate::mesh::SimplicialMesh;
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::spaces::{face_trace, PiecewiseField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Convection,
    Diffusion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub element_k: Vec<f64>,
    pub elements: Vec<Regime>,
    pub face_k: Vec<f64>,
    pub faces: Vec<Regime>,
}

impl RegimeReport {
    pub fn convection_elements(&self) -> usize {
        self.elements.iter().filter(|r| **r == Regime::Convection).count()
    }

    pub fn diffusion_elements(&self) -> usize {
        self.elements.len() - self.convection_elements()
    }

    pub fn convection_faces(&self) -> usize {
        self.faces.iter().filter(|r| **r == Regime::Convection).count()
    }

    pub fn diffusion_faces(&self) -> usize {
        self.faces.len() - self.convection_faces()
    }
}

/// Sample points of an element: quadrature points and vertices.
fn element_samples(mesh: &SimplicialMesh, t: usize, rule: &TriangleRule) -> Vec<Vec2> {
    let tri = mesh.element_points(t);
    let mut pts: Vec<Vec2> = rule.on_triangle(&tri, mesh.area(t)).map(|(_, x, _)| x).collect();
    pts.extend_from_slice(&tri);
    pts
}

fn face_params(edge: &EdgeRule) -> Vec<f64> {
    let mut s = edge.points.clone();
    s.push(0.0);
    s.push(1.0);
    s
}

/// `K̂_T`, `K̂_F` and the induced partitions. `field` supplies `u` and its
/// gradient, `interpolant` the field whose jumps enter `K̂_F` (the
/// interpolant of `u`, or `u_h` itself).
pub fn regime_partition(
    mesh: &SimplicialMesh,
    field: &dyn PiecewiseField,
    interpolant: &dyn PiecewiseField,
    nu: f64,
    r: f64,
    rule: &TriangleRule,
    edge: &EdgeRule,
) -> RegimeReport {
    let power = |g: &Tensor2| math::powf(math::tensor_norm(g), r - 2.0);
    // Per element: sup |∇u|^{r−2} and sup |u|.
    let mut local_k = Vec::with_capacity(mesh.num_elements());
    let mut local_u = Vec::with_capacity(mesh.num_elements());
    for t in 0..mesh.num_elements() {
        let (mut k, mut u) = (0.0f64, 0.0f64);
        for x in element_samples(mesh, t, rule) {
            k = k.max(power(&field.gradient(t, x)));
            u = u.max(math::norm(field.value(t, x)));
        }
        local_k.push(k);
        local_u.push(u);
    }
    let mut element_k = Vec::with_capacity(mesh.num_elements());
    let mut elements = Vec::with_capacity(mesh.num_elements());
    for t in 0..mesh.num_elements() {
        let k = mesh
            .element_patch(t)
            .into_iter()
            .map(|s| local_k[s])
            .fold(0.0, f64::max);
        element_k.push(k);
        elements.push(if nu * k < local_u[t] * mesh.diameter(t) {
            Regime::Convection
        } else {
            Regime::Diffusion
        });
    }
    let params = face_params(edge);
    let mut face_k = Vec::with_capacity(mesh.num_faces());
    let mut faces = Vec::with_capacity(mesh.num_faces());
    for f in 0..mesh.num_faces() {
        let face = mesh.face(f);
        let h = face.length;
        let (mut kg, mut kj, mut un) = (0.0f64, 0.0f64, 0.0f64);
        for &s in &params {
            let x = mesh.face_point(f, s);
            for t in face.elements() {
                kg = kg.max(power(&field.gradient(t, x)));
                un = un.max(math::dot(field.value(t, x), face.normal).abs());
            }
        }
        for tr in face_trace(mesh, interpolant, f, &params) {
            kj = kj.max(math::powf(math::norm(tr.jump), r - 2.0));
        }
        let k = kg.max(math::powf(h, 2.0 - r) * kj);
        face_k.push(k);
        faces.push(if nu * k < un * h {
            Regime::Convection
        } else {
            Regime::Diffusion
        });
    }
    RegimeReport {
        element_k,
        elements,
        face_k,
        faces,
    }
}
