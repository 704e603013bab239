//! Plain-text triangle meshes.
//!
//! ```text
//! vertices 4 elements 2
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! 0 1 2
//! 0 2 3
//! tags: wall 0 1 1 2
//! tags: inlet 3 0
//! ```
//!
//! Indices are 0-based. Each `tags:` line names a boundary tag followed by
//! vertex pairs, one pair per boundary face. Untagged boundary faces are
//! `generic`. Blank lines and lines starting with `#` are ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use hdivflow_core::mesh::{BoundaryTag, SimplicialMesh};

use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next meaningful line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::parse(self.last + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str, count: usize, what: &str) -> Result<Vec<T>> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::parse(line, format!("invalid {what} entry '{tok}'")))
        })
        .collect::<Result<Vec<T>>>()?;
    if values.len() != count {
        return Err(Error::parse(
            line,
            format!("expected {count} values for {what}, found {}", values.len()),
        ));
    }
    Ok(values)
}

fn header(line: usize, text: &str) -> Result<(usize, usize)> {
    let tok: Vec<&str> = text.split_whitespace().collect();
    match tok.as_slice() {
        ["vertices", n, "elements", m] => {
            let n = n.parse().map_err(|_| Error::parse(line, format!("invalid vertex count '{n}'")))?;
            let m = m.parse().map_err(|_| Error::parse(line, format!("invalid element count '{m}'")))?;
            Ok((n, m))
        }
        _ => Err(Error::parse(line, "expected header 'vertices N elements M'")),
    }
}

/// Parse the text form. Connectivity is validated by
/// [`SimplicialMesh::from_raw`]; tag lines must reference boundary faces.
pub fn parse_mesh(text: &str) -> Result<SimplicialMesh> {
    let mut lines = Lines::new(text);
    let (line, head) = lines.expect("header")?;
    let (nv, ne) = header(line, head)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, text) = lines.expect("vertex coordinates")?;
        let v = numbers::<f64>(line, text, 2, "vertex")?;
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::parse(line, "vertex coordinates must be finite"));
        }
        vertices.push([v[0], v[1]]);
    }
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (line, text) = lines.expect("element")?;
        let e = numbers::<usize>(line, text, 3, "element")?;
        elements.push([e[0], e[1], e[2]]);
    }
    let mut mesh = SimplicialMesh::from_raw(vertices, elements)?;
    while let Some((line, text)) = lines.next() {
        let rest = text
            .strip_prefix("tags:")
            .ok_or_else(|| Error::parse(line, format!("unexpected content '{text}'")))?;
        let mut tok = rest.split_whitespace();
        let name = tok.next().ok_or_else(|| Error::parse(line, "tag line without a name"))?;
        let tag = BoundaryTag::from_name(name).ok_or_else(|| {
            Error::parse(line, format!("unknown tag '{name}' (expected wall, inlet, outlet or generic)"))
        })?;
        let ids = tok
            .map(|t| t.parse::<usize>().map_err(|_| Error::parse(line, format!("invalid vertex index '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        if ids.len() % 2 != 0 {
            return Err(Error::parse(line, "tag vertex list must contain pairs"));
        }
        for pair in ids.chunks(2) {
            let f = mesh
                .find_face(pair[0], pair[1])
                .ok_or_else(|| Error::parse(line, format!("no face joins vertices {} and {}", pair[0], pair[1])))?;
            mesh.set_boundary_tag(f, tag)
                .map_err(|e| Error::parse(line, e.to_string()))?;
        }
    }
    Ok(mesh)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<SimplicialMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text).map_err(|e| e.in_file(path))
}

pub fn write_mesh(mesh: &SimplicialMesh, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "vertices {} elements {}", mesh.num_vertices(), mesh.num_elements())?;
    for v in mesh.vertices() {
        writeln!(out, "{:e} {:e}", v[0], v[1])?;
    }
    for e in mesh.elements() {
        writeln!(out, "{} {} {}", e[0], e[1], e[2])?;
    }
    for tag in BoundaryTag::ALL {
        let faces: Vec<usize> = mesh
            .boundary_faces()
            .filter(|&f| mesh.boundary_tag(f) == Some(tag))
            .collect();
        if faces.is_empty() {
            continue;
        }
        write!(out, "tags: {}", tag.name())?;
        for f in faces {
            let [a, b] = mesh.face(f).vertices;
            write!(out, " {a} {b}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_mesh(mesh: &SimplicialMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hdivflow_core::mesh::{build_structured_mesh, Rectangle, StructuredMesh};

    const SQUARE: &str = "vertices 4 elements 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n";

    #[test]
    fn two_triangle_square() {
        let m = parse_mesh(SQUARE).unwrap();
        let reference = build_structured_mesh(1, Rectangle::UNIT_SQUARE).unwrap();
        assert_eq!(m.num_faces(), reference.num_faces());
        assert_eq!(m.interior_faces().count(), 1);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        assert!(m.boundary_faces().all(|f| m.boundary_tag(f) == Some(BoundaryTag::Generic)));
    }

    #[test]
    fn tags_are_applied() {
        let text = format!("{SQUARE}# walls\ntags: wall 0 1 1 2\ntags: inlet 3 0\n");
        let m = parse_mesh(&text).unwrap();
        let f = m.find_face(0, 3).unwrap();
        assert_eq!(m.boundary_tag(f), Some(BoundaryTag::Inlet));
        let count = |tag| m.boundary_faces().filter(|&f| m.boundary_tag(f) == Some(tag)).count();
        assert_eq!(count(BoundaryTag::Wall), 2);
        assert_eq!(count(BoundaryTag::Generic), 1);
    }

    #[test]
    fn repeated_triangle_is_rejected() {
        let text = "vertices 4 elements 3\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n2 0 1\n";
        let err = parse_mesh(text).unwrap_err().to_string();
        assert!(err.contains("duplicates"), "{err}");
    }

    #[test]
    fn malformed_inputs_name_the_line() {
        let err = parse_mesh("vertices 2 elements 1\n0 0\n1 x\n").unwrap_err().to_string();
        assert!(err.starts_with("line 3"), "{err}");
        let err = parse_mesh("points 3\n").unwrap_err().to_string();
        assert!(err.contains("vertices N elements M"));
        let err = parse_mesh("vertices 3 elements 1\n0 0\n1 0\n0 1\n").unwrap_err().to_string();
        assert!(err.contains("end of file"), "{err}");
        let err = parse_mesh(&format!("{SQUARE}tags: wall 0 2\n")).unwrap_err().to_string();
        assert!(err.contains("line 8"), "{err}");
        let err = parse_mesh(&format!("{SQUARE}tags: lid 0 1\n")).unwrap_err().to_string();
        assert!(err.contains("unknown tag 'lid'"));
    }

    #[test]
    fn zero_area_triangle_is_rejected() {
        let err = parse_mesh("vertices 3 elements 1\n0 0\n1 0\n2 0\n0 1 2\n").unwrap_err();
        assert!(err.to_string().contains("zero area"));
    }

    #[test]
    fn write_then_read_round_trips() {
        let mut m = StructuredMesh::new(3, Rectangle::UNIT_SQUARE).jitter(0.2, 5).build().unwrap();
        m.tag_boundary(|x, _| if x[1] > 1.0 - 1e-12 { BoundaryTag::Inlet } else { BoundaryTag::Wall });
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = parse_mesh(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.elements(), m.elements());
        for f in m.boundary_faces() {
            let [a, b] = m.face(f).vertices;
            let g = back.find_face(a, b).unwrap();
            assert_eq!(back.boundary_tag(g), m.boundary_tag(f));
        }
    }
}
