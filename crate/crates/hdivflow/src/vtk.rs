//! Legacy ASCII VTK (4.2) unstructured grids: cell pressure and vertex
//! velocity averaged over the incident triangles.

use std::fs;
use std::io::Write;
use std::path::Path;

use hdivflow_core::math::Vec2;
use hdivflow_core::{PressureField, VelocityField, VelocitySpace};

use crate::error::{Error, Result};

const VTK_TRIANGLE: u8 = 5;

/// Vertex values of the discontinuous velocity, averaged over incident
/// elements.
pub fn vertex_velocity(space: &VelocitySpace, u: &VelocityField) -> Vec<Vec2> {
    let mesh = space.mesh();
    let mut sum = vec![[0.0; 2]; mesh.num_vertices()];
    let mut count = vec![0usize; mesh.num_vertices()];
    for (t, tri) in mesh.elements().iter().enumerate() {
        for &v in tri {
            let val = space.value(u, t, mesh.vertices()[v]);
            sum[v][0] += val[0];
            sum[v][1] += val[1];
            count[v] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c == 0 { [0.0; 2] } else { [s[0] / c as f64, s[1] / c as f64] })
        .collect()
}

pub fn write_vtk(
    space: &VelocitySpace,
    u: &VelocityField,
    p: &PressureField,
    title: &str,
    out: &mut impl Write,
) -> std::io::Result<()> {
    let mesh = space.mesh();
    let (nv, ne) = (mesh.num_vertices(), mesh.num_elements());
    writeln!(out, "# vtk DataFile Version 4.2")?;
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {nv} double")?;
    for x in mesh.vertices() {
        writeln!(out, "{:e} {:e} 0", x[0], x[1])?;
    }
    writeln!(out, "CELLS {ne} {}", 4 * ne)?;
    for e in mesh.elements() {
        writeln!(out, "3 {} {} {}", e[0], e[1], e[2])?;
    }
    writeln!(out, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(out, "{VTK_TRIANGLE}")?;
    }
    writeln!(out, "CELL_DATA {ne}")?;
    writeln!(out, "SCALARS pressure double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in &p.0 {
        writeln!(out, "{v:e}")?;
    }
    writeln!(out, "POINT_DATA {nv}")?;
    writeln!(out, "VECTORS velocity double")?;
    for v in vertex_velocity(space, u) {
        writeln!(out, "{:e} {:e} 0", v[0], v[1])?;
    }
    Ok(())
}

pub fn save_vtk(
    space: &VelocitySpace,
    u: &VelocityField,
    p: &PressureField,
    title: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_vtk(space, u, p, title, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hdivflow_core::mesh::{build_structured_mesh, Rectangle};

    #[test]
    fn layout_and_counts() {
        let m = build_structured_mesh(3, Rectangle::UNIT_SQUARE).unwrap();
        let space = VelocitySpace::new(&m).unwrap();
        let u = space.rt_interpolate(|x| [1.0 + x[1], -2.0]);
        let p = PressureField((0..m.num_elements()).map(|t| t as f64).collect());
        let mut buf = Vec::new();
        write_vtk(&space, &u, &p, "test\nfield", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 4.2");
        assert_eq!(lines[1], "test field");
        assert!(lines.contains(&"CELLS 18 72"));
        assert!(lines.contains(&"CELL_TYPES 18"));
        assert!(lines.contains(&"CELL_DATA 18"));
        assert!(lines.contains(&"POINT_DATA 16"));
        let cell_types = lines.iter().position(|l| *l == "CELL_TYPES 18").unwrap();
        assert!(lines[cell_types + 1..cell_types + 19].iter().all(|l| *l == "5"));
    }

    #[test]
    fn linear_fields_are_reproduced_at_vertices() {
        let m = build_structured_mesh(2, Rectangle::UNIT_SQUARE).unwrap();
        let space = VelocitySpace::new(&m).unwrap();
        let f = |x: Vec2| [x[0] - 2.0 * x[1], 0.5 + x[0]];
        let u = space.rt_interpolate(f);
        for (x, v) in m.vertices().iter().zip(vertex_velocity(&space, &u)) {
            let e = f(*x);
            assert!((v[0] - e[0]).abs() < 1e-12 && (v[1] - e[1]).abs() < 1e-12);
        }
    }
}
