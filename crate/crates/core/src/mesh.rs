//! Conforming triangulations of planar polygonal domains.
//!
//! Faces (edges) carry a fixed unit normal: on interior faces it points out
//! of the lower-indexed element, on boundary faces it is the outward normal.
//! Local face `i` of an element is the edge opposite its vertex `i`.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{self, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    Wall,
    Inlet,
    Outlet,
    Generic,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [
        BoundaryTag::Wall,
        BoundaryTag::Inlet,
        BoundaryTag::Outlet,
        BoundaryTag::Generic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Wall => "wall",
            BoundaryTag::Inlet => "inlet",
            BoundaryTag::Outlet => "outlet",
            BoundaryTag::Generic => "generic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "wall" => Some(BoundaryTag::Wall),
            "inlet" => Some(BoundaryTag::Inlet),
            "outlet" => Some(BoundaryTag::Outlet),
            "generic" => Some(BoundaryTag::Generic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Endpoints with `vertices[0] < vertices[1]`; the face parameter
    /// `s ∈ [0, 1]` runs from the first to the second.
    pub vertices: [usize; 2],
    /// The element `n_F` points out of.
    pub first: usize,
    /// The element on the other side, `None` on the boundary.
    pub second: Option<usize>,
    /// Local index of this face in `first` and (if any) `second`.
    pub local: [usize; 2],
    pub normal: Vec2,
    pub length: f64,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.second.is_some()
    }

    /// Elements sharing the face (`T_F`), `first` first.
    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        core::iter::once(self.first).chain(self.second)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStatistics {
    pub h_max: f64,
    pub h_mean: f64,
    /// `max_T h_T / ρ_T` with `ρ_T` the inradius.
    pub shape_regularity: f64,
}

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    vertices: Vec<Vec2>,
    elements: Vec<[usize; 3]>,
    faces: Vec<Face>,
    element_faces: Vec<[usize; 3]>,
    element_face_signs: Vec<[f64; 3]>,
    boundary_tags: Vec<Option<BoundaryTag>>,
    areas: Vec<f64>,
    diameters: Vec<f64>,
}

impl SimplicialMesh {
    /// Build the full face topology from a vertex list and triangles.
    ///
    /// Clockwise triangles are reoriented. Boundary faces start out tagged
    /// [`BoundaryTag::Generic`].
    pub fn from_raw(vertices: Vec<Vec2>, mut elements: Vec<[usize; 3]>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidMesh("mesh has no elements".into()));
        }
        let nv = vertices.len();
        let mut seen = BTreeSet::new();
        for (t, tri) in elements.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nv {
                    return Err(Error::InvalidMesh(format!(
                        "element {t} references vertex {v} but only {nv} vertices exist"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("element {t} repeats a vertex")));
            }
            let mut key = *tri;
            key.sort_unstable();
            if !seen.insert(key) {
                return Err(Error::InvalidMesh(format!(
                    "element {t} duplicates an earlier element {:?}",
                    key
                )));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let twice_area = math::cross(a, b, c);
            let scale = math::norm(math::sub(b, a)).max(math::norm(math::sub(c, a)));
            if twice_area.abs() <= 1e-14 * scale * scale {
                return Err(Error::InvalidMesh(format!("element {t} has zero area")));
            }
            if twice_area < 0.0 {
                tri.swap(1, 2);
            }
        }

        // Edge → (element, local index) incidences, deterministic order.
        let mut incidences: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tri) in elements.iter().enumerate() {
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                incidences.entry((a.min(b), a.max(b))).or_default().push((t, i));
            }
        }
        for (&(a, b), inc) in &incidences {
            if inc.len() > 2 {
                return Err(Error::InvalidMesh(format!(
                    "non-conforming connectivity: edge ({a}, {b}) is shared by {} elements",
                    inc.len()
                )));
            }
        }
        check_hanging_vertices(&vertices, &incidences)?;

        let mut face_of_edge: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut faces = Vec::with_capacity(incidences.len());
        let mut element_faces = vec![[0usize; 3]; elements.len()];
        let mut element_face_signs = vec![[0.0f64; 3]; elements.len()];
        for (t, tri) in elements.iter().enumerate() {
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                if let Some(&f) = face_of_edge.get(&key) {
                    let face: &mut Face = &mut faces[f];
                    face.second = Some(t);
                    face.local[1] = i;
                    element_faces[t][i] = f;
                    element_face_signs[t][i] = -1.0;
                    continue;
                }
                let pa = vertices[a];
                let pb = vertices[b];
                let d = math::sub(pb, pa);
                let length = math::norm(d);
                // CCW triangle: the outward normal of edge a→b is (dy, -dx).
                let normal = [d[1] / length, -d[0] / length];
                let f = faces.len();
                faces.push(Face {
                    vertices: [key.0, key.1],
                    first: t,
                    second: None,
                    local: [i, usize::MAX],
                    normal,
                    length,
                });
                face_of_edge.insert(key, f);
                element_faces[t][i] = f;
                element_face_signs[t][i] = 1.0;
            }
        }

        let boundary_tags = faces
            .iter()
            .map(|f| (!f.is_interior()).then_some(BoundaryTag::Generic))
            .collect();
        let areas = elements
            .iter()
            .map(|tri| 0.5 * math::cross(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]))
            .collect();
        let diameters = elements
            .iter()
            .map(|tri| {
                (0..3)
                    .map(|i| math::norm(math::sub(vertices[tri[(i + 1) % 3]], vertices[tri[i]])))
                    .fold(0.0, f64::max)
            })
            .collect();

        Ok(Self {
            vertices,
            elements,
            faces,
            element_faces,
            element_face_signs,
            boundary_tags,
            areas,
            diameters,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn element_faces(&self, t: usize) -> [usize; 3] {
        self.element_faces[t]
    }

    /// `+1` when the outward normal of `t` on its local face `i` equals `n_F`,
    /// `-1` when it equals `-n_F`.
    pub fn element_face_sign(&self, t: usize, i: usize) -> f64 {
        self.element_face_signs[t][i]
    }

    pub fn element_points(&self, t: usize) -> [Vec2; 3] {
        self.elements[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    /// `h_T`, the longest edge.
    pub fn diameter(&self, t: usize) -> f64 {
        self.diameters[t]
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.element_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn inradius(&self, t: usize) -> f64 {
        let [a, b, c] = self.element_points(t);
        let perimeter = math::norm(math::sub(b, a))
            + math::norm(math::sub(c, b))
            + math::norm(math::sub(a, c));
        2.0 * self.areas[t] / perimeter
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn face_point(&self, f: usize, s: f64) -> Vec2 {
        let face = &self.faces[f];
        let a = self.vertices[face.vertices[0]];
        let b = self.vertices[face.vertices[1]];
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }

    pub fn face_midpoint(&self, f: usize) -> Vec2 {
        self.face_point(f, 0.5)
    }

    /// Barycentric coordinates of `x` with respect to element `t`.
    pub fn barycentric(&self, t: usize, x: Vec2) -> [f64; 3] {
        let [a, b, c] = self.element_points(t);
        let d = math::cross(a, b, c);
        let l1 = math::cross(a, x, c) / d;
        let l2 = math::cross(a, b, x) / d;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn contains(&self, t: usize, x: Vec2, tol: f64) -> bool {
        self.barycentric(t, x).iter().all(|&l| l >= -tol)
    }

    /// First element containing `x` (linear scan).
    pub fn locate(&self, x: Vec2) -> Option<usize> {
        (0..self.num_elements()).find(|&t| self.contains(t, x, 1e-12))
    }

    /// Neighbors of `t` across its faces (`T_T` without `t`).
    pub fn neighbors(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.element_faces[t].into_iter().filter_map(move |f| {
            let face = &self.faces[f];
            face.second.map(|s| if s == t { face.first } else { s })
        })
    }

    /// `ω_T`: `t` and all elements sharing a face with it.
    pub fn element_patch(&self, t: usize) -> Vec<usize> {
        core::iter::once(t).chain(self.neighbors(t)).collect()
    }

    /// `ω_F`: the one or two elements sharing `f`.
    pub fn face_patch(&self, f: usize) -> Vec<usize> {
        self.faces[f].elements().collect()
    }

    pub fn boundary_tag(&self, f: usize) -> Option<BoundaryTag> {
        self.boundary_tags[f]
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| !self.faces[f].is_interior())
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_interior())
    }

    /// Set the tag of boundary face `f`. Interior faces cannot be tagged.
    pub fn set_boundary_tag(&mut self, f: usize, tag: BoundaryTag) -> Result<()> {
        if self.faces[f].is_interior() {
            return Err(Error::InvalidMesh(format!("face {f} is interior and cannot be tagged")));
        }
        self.boundary_tags[f] = Some(tag);
        Ok(())
    }

    /// Tag every boundary face from its midpoint and outward normal.
    pub fn tag_boundary(&mut self, mut rule: impl FnMut(Vec2, Vec2) -> BoundaryTag) {
        for f in 0..self.faces.len() {
            if !self.faces[f].is_interior() {
                let tag = rule(self.face_midpoint(f), self.faces[f].normal);
                self.boundary_tags[f] = Some(tag);
            }
        }
    }

    /// Index of the face joining vertices `a` and `b`, if any.
    pub fn find_face(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.faces.iter().position(|f| f.vertices == key)
    }

    pub fn statistics(&self) -> MeshStatistics {
        mesh_statistics(self)
    }
}

pub fn mesh_statistics(mesh: &SimplicialMesh) -> MeshStatistics {
    let n = mesh.num_elements();
    let mut h_max = 0.0f64;
    let mut h_sum = 0.0;
    let mut shape = 0.0f64;
    for t in 0..n {
        let h = mesh.diameter(t);
        h_max = h_max.max(h);
        h_sum += h;
        shape = shape.max(h / mesh.inradius(t));
    }
    MeshStatistics {
        h_max,
        h_mean: h_sum / n as f64,
        shape_regularity: shape,
    }
}

fn check_hanging_vertices(
    vertices: &[Vec2],
    incidences: &BTreeMap<(usize, usize), Vec<(usize, usize)>>,
) -> Result<()> {
    let boundary: Vec<(usize, usize)> = incidences
        .iter()
        .filter(|(_, inc)| inc.len() == 1)
        .map(|(&k, _)| k)
        .collect();
    let candidates: BTreeSet<usize> = boundary.iter().flat_map(|&(a, b)| [a, b]).collect();
    for &(a, b) in &boundary {
        let pa = vertices[a];
        let d = math::sub(vertices[b], pa);
        let len2 = math::dot(d, d);
        for &v in &candidates {
            if v == a || v == b {
                continue;
            }
            let w = math::sub(vertices[v], pa);
            let s = math::dot(w, d) / len2;
            if s <= 1e-9 || s >= 1.0 - 1e-9 {
                continue;
            }
            let dist2 = math::dot(w, w) - s * s * len2;
            if dist2 <= 1e-18 * len2 {
                return Err(Error::InvalidMesh(format!(
                    "non-conforming connectivity: hanging vertex {v} on edge ({a}, {b})"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rectangle {
    pub const UNIT_SQUARE: Rectangle = Rectangle {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.x1 - self.x0) + (self.y1 - self.y0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Every cell split along its (x0,y0)–(x1,y1) diagonal.
    Diagonal,
    /// Every cell split into four triangles around its center.
    Crisscross,
}

/// Structured triangulation of a rectangle with optional vertex jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    pub nx: usize,
    pub ny: usize,
    pub domain: Rectangle,
    pub pattern: Pattern,
    /// Interior vertices move by up to this fraction of the cell size.
    pub jitter: f64,
    pub seed: u64,
}

impl StructuredMesh {
    pub fn new(n: usize, domain: Rectangle) -> Self {
        Self {
            nx: n,
            ny: n,
            domain,
            pattern: Pattern::Diagonal,
            jitter: 0.0,
            seed: 0,
        }
    }

    pub fn with_cells(mut self, nx: usize, ny: usize) -> Self {
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn pattern(mut self, pattern: Pattern) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn jitter(mut self, fraction: f64, seed: u64) -> Self {
        self.jitter = fraction;
        self.seed = seed;
        self
    }

    pub fn build(&self) -> Result<SimplicialMesh> {
        self.build_mapped(|p| p)
    }

    /// Build, then push every vertex through `map` before validation.
    /// The map must keep the domain boundary on the boundary.
    pub fn build_mapped(&self, map: impl Fn(Vec2) -> Vec2) -> Result<SimplicialMesh> {
        let (nx, ny) = (self.nx, self.ny);
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("subdivisions must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::InvalidParameter(format!(
                "jitter fraction {} outside [0, 0.5)",
                self.jitter
            )));
        }
        let d = self.domain;
        let hx = (d.x1 - d.x0) / nx as f64;
        let hy = (d.y1 - d.y0) / ny as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut shake = |interior: bool| -> Vec2 {
            if interior && self.jitter > 0.0 {
                let a = self.jitter;
                [rng.gen_range(-a..=a) * hx, rng.gen_range(-a..=a) * hy]
            } else {
                [0.0, 0.0]
            }
        };

        let mut vertices = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                let interior = i > 0 && i < nx && j > 0 && j < ny;
                let dx = shake(interior);
                vertices.push([
                    d.x0 + i as f64 * hx + dx[0],
                    d.y0 + j as f64 * hy + dx[1],
                ]);
            }
        }
        let grid = |i: usize, j: usize| j * (nx + 1) + i;
        let mut elements = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let v00 = grid(i, j);
                let v10 = grid(i + 1, j);
                let v01 = grid(i, j + 1);
                let v11 = grid(i + 1, j + 1);
                match self.pattern {
                    Pattern::Diagonal => {
                        elements.push([v00, v10, v11]);
                        elements.push([v00, v11, v01]);
                    }
                    Pattern::Crisscross => {
                        let dx = shake(true);
                        let c = vertices.len();
                        vertices.push([
                            d.x0 + (i as f64 + 0.5) * hx + 0.5 * dx[0],
                            d.y0 + (j as f64 + 0.5) * hy + 0.5 * dx[1],
                        ]);
                        elements.push([v00, v10, c]);
                        elements.push([v10, v11, c]);
                        elements.push([v11, v01, c]);
                        elements.push([v01, v00, c]);
                    }
                }
            }
        }
        for v in vertices.iter_mut() {
            *v = map(*v);
        }
        for (t, tri) in elements.iter().enumerate() {
            let area = 0.5 * math::cross(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area <= 1e-14 * hx * hy {
                return Err(Error::MeshQuality(format!(
                    "element {t} is inverted or degenerate (signed area {area:e})"
                )));
            }
        }
        SimplicialMesh::from_raw(vertices, elements)
    }
}

/// Diagonal triangulation of `domain` with `n` cells per side.
pub fn build_structured_mesh(n: usize, domain: Rectangle) -> Result<SimplicialMesh> {
    StructuredMesh::new(n, domain).build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> SimplicialMesh {
        build_structured_mesh(n, Rectangle::UNIT_SQUARE).unwrap()
    }

    #[test]
    fn smallest_split_topology() {
        let m = unit(1);
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_faces(), 5);
        assert_eq!(m.interior_faces().count(), 1);
    }

    #[test]
    fn area_partition() {
        for n in [2, 5] {
            assert!((unit(n).total_area() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jittered_mesh_is_valid() {
        let m = StructuredMesh::new(4, Rectangle::UNIT_SQUARE)
            .jitter(0.2, 7)
            .build()
            .unwrap();
        assert!((0..m.num_elements()).all(|t| m.area(t) > 0.0));
        let stats = m.statistics();
        assert!((stats.h_mean - 0.35).abs() < 0.05, "{stats:?}");
        assert!(stats.shape_regularity.is_finite());
        assert!((m.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excessive_jitter_is_rejected() {
        let domain = Rectangle::UNIT_SQUARE;
        let err = StructuredMesh::new(3, domain).build_mapped(|p| {
            // Fold the middle of the square over itself.
            if p[0] > 0.2 && p[0] < 0.8 && p[1] > 0.2 && p[1] < 0.8 {
                [1.0 - p[0], p[1]]
            } else {
                p
            }
        });
        assert!(matches!(err, Err(Error::MeshQuality(_))));
    }

    #[test]
    fn statistics_of_uniform_meshes() {
        let m = unit(1);
        assert!((m.statistics().h_max - core::f64::consts::SQRT_2).abs() < 1e-15);
        let s = unit(4).statistics();
        assert!((s.h_mean - s.h_max).abs() < 1e-14);
    }

    #[test]
    fn normals_and_signs_are_consistent() {
        let m = StructuredMesh::new(3, Rectangle::UNIT_SQUARE)
            .pattern(Pattern::Crisscross)
            .jitter(0.1, 3)
            .build()
            .unwrap();
        for (f, face) in m.faces().iter().enumerate() {
            assert!((math::norm(face.normal) - 1.0).abs() < 1e-14);
            // n_F points from the first element towards the face.
            let c = m.centroid(face.first);
            let to_face = math::sub(m.face_midpoint(f), c);
            assert!(math::dot(to_face, face.normal) > 0.0);
            if let Some(s) = face.second {
                assert!(face.first < s);
                assert_eq!(m.element_face_sign(s, face.local[1]), -1.0);
                let c2 = m.centroid(s);
                assert!(math::dot(math::sub(m.face_midpoint(f), c2), face.normal) < 0.0);
            }
            assert_eq!(m.element_face_sign(face.first, face.local[0]), 1.0);
        }
        let boundary: f64 = m.boundary_faces().map(|f| m.face(f).length).sum();
        assert!((boundary - 4.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_halves_h() {
        let h4 = unit(4).statistics().h_max;
        let h8 = unit(8).statistics().h_max;
        assert!((h4 / h8 - 2.0).abs() < 0.1);
    }

    #[test]
    fn duplicate_and_degenerate_elements_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0]];
        let err = SimplicialMesh::from_raw(v.clone(), vec![[0, 1, 2], [1, 2, 0]]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
        let err = SimplicialMesh::from_raw(v, vec![[0, 1, 3]]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn hanging_vertex_rejected() {
        // Big triangle on the left, two small ones on the right sharing a
        // midpoint that the big triangle does not see.
        let v = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [1.0, 0.5],
            [2.0, 0.5],
        ];
        let err = SimplicialMesh::from_raw(v, vec![[0, 1, 2], [1, 4, 3], [3, 4, 2]]);
        assert!(matches!(err, Err(Error::InvalidMesh(ref m)) if m.contains("hanging")), "{err:?}");
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let m = SimplicialMesh::from_raw(v, vec![[0, 2, 1]]).unwrap();
        assert!(m.area(0) > 0.0);
    }

    #[test]
    fn patches() {
        let m = unit(2);
        for t in 0..m.num_elements() {
            let p = m.element_patch(t);
            assert_eq!(p[0], t);
            assert!(p.len() >= 2 && p.len() <= 4);
        }
        for f in 0..m.num_faces() {
            let n = m.face_patch(f).len();
            assert_eq!(n, if m.face(f).is_interior() { 2 } else { 1 });
        }
    }
}
