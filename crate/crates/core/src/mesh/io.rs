//! ASCII mesh format:
//!
//! ```text
//! tetmesh 1
//! vertices N
//! x y z          (N lines)
//! cells M
//! a b c d        (M lines, zero-based vertex indices)
//! ```
//!
//! Tokens are whitespace separated; `#` starts a comment running to the end
//! of the line.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, MeshOptions, Point};
use crate::{Error, Result};

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_mesh_str(&text, &path.display().to_string(), MeshOptions::default())
}

pub fn read_mesh_str(text: &str, source_name: &str, options: MeshOptions) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let last_line = text.lines().count().max(1);

    let (line, header) = lines
        .next()
        .ok_or_else(|| err(last_line, "empty mesh file, expected `tetmesh 1`".into()))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["tetmesh", "1"] {
        return Err(err(line, format!("expected header `tetmesh 1`, found `{header}`")));
    }

    let mut section = |name: &str| -> Result<usize> {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(last_line, format!("unexpected end of file, expected `{name} <count>`")))?;
        let tokens: Vec<_> = l.split_whitespace().collect();
        if tokens.len() != 2 || tokens[0] != name {
            return Err(err(line, format!("expected `{name} <count>`, found `{l}`")));
        }
        tokens[1]
            .parse::<usize>()
            .map_err(|_| err(line, format!("invalid {name} count `{}`", tokens[1])))
    };

    let nv = section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(last_line, format!("expected {nv} vertex lines")))?;
        let coords = parse_row::<f64>(l).map_err(|m| err(line, m))?;
        if coords.len() != 3 || !coords.iter().all(|c| c.is_finite()) {
            return Err(err(line, format!("expected 3 finite coordinates, found `{l}`")));
        }
        vertices.push(Point::new(coords[0], coords[1], coords[2]));
    }

    let mut lines = lines;
    let (line, l) = lines
        .next()
        .ok_or_else(|| err(last_line, "unexpected end of file, expected `cells <count>`".into()))?;
    let tokens: Vec<_> = l.split_whitespace().collect();
    if tokens.len() != 2 || tokens[0] != "cells" {
        return Err(err(line, format!("expected `cells <count>`, found `{l}`")));
    }
    let nc: usize = tokens[1]
        .parse()
        .map_err(|_| err(line, format!("invalid cells count `{}`", tokens[1])))?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(last_line, format!("expected {nc} cell lines")))?;
        let ids = parse_row::<usize>(l).map_err(|m| err(line, m))?;
        if ids.len() != 4 {
            return Err(err(line, format!("expected 4 vertex indices, found `{l}`")));
        }
        if let Some(&bad) = ids.iter().find(|&&v| v >= nv) {
            return Err(err(line, format!("vertex index {bad} out of range (have {nv} vertices)")));
        }
        cells.push([ids[0], ids[1], ids[2], ids[3]]);
    }
    if let Some((line, l)) = lines.next() {
        return Err(err(line, format!("trailing content `{l}`")));
    }
    Mesh::from_cells(vertices, cells, options)
}

fn parse_row<T: std::str::FromStr>(line: &str) -> std::result::Result<Vec<T>, String> {
    line.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| format!("cannot parse `{t}`")))
        .collect()
}

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("tetmesh 1\n");
    let _ = writeln!(out, "vertices {}", mesh.vertices().len());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    let _ = writeln!(out, "cells {}", mesh.num_cells());
    for c in mesh.cells() {
        let _ = writeln!(out, "{} {} {} {}", c[0], c[1], c[2], c[3]);
    }
    out
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_mesh_string(mesh)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, BoxDomain};

    #[test]
    fn round_trip_matches_builder() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let text = write_mesh_string(&mesh);
        let back = read_mesh_str(&text, "cube", MeshOptions::default()).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a single tet\ntetmesh 1\n\nvertices 4 # four\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ncells 1\n0 1 2 3\n";
        let mesh = read_mesh_str(text, "t", MeshOptions::default()).unwrap();
        assert_eq!(mesh.num_cells(), 1);
    }

    #[test]
    fn empty_file_is_parse_error() {
        let e = read_mesh_str("", "empty", MeshOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }), "{e}");
    }

    #[test]
    fn bad_token_reports_line() {
        let text = "tetmesh 1\nvertices 1\n0 zero 0\ncells 0\n";
        match read_mesh_str(text, "bad", MeshOptions::default()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn hanging_node_rejected() {
        // Two unit cubes side by side along x. The left cube is a single
        // Kuhn cube; the right one is split into 8 sub-cubes, so its face at
        // x = 1 carries vertices that the left cube's faces do not.
        let coarse = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let fine = build_box_mesh(
            &BoxDomain::new(Point::new(1.0, 0.0, 0.0), Point::new(2.0, 1.0, 1.0)),
            [2, 2, 2],
        )
        .unwrap();
        let mut vertices: Vec<Point> = coarse.vertices().to_vec();
        let mut cells: Vec<[usize; 4]> = coarse.cells().to_vec();
        let mut map = Vec::new();
        for v in fine.vertices() {
            match vertices.iter().position(|w| (w - v).norm() < 1e-12) {
                Some(i) => map.push(i),
                None => {
                    map.push(vertices.len());
                    vertices.push(*v);
                }
            }
        }
        for c in fine.cells() {
            cells.push(c.map(|v| map[v]));
        }
        let mut text = String::from("tetmesh 1\n");
        text += &format!("vertices {}\n", vertices.len());
        for v in &vertices {
            text += &format!("{} {} {}\n", v.x, v.y, v.z);
        }
        text += &format!("cells {}\n", cells.len());
        for c in &cells {
            text += &format!("{} {} {} {}\n", c[0], c[1], c[2], c[3]);
        }
        let e = read_mesh_str(&text, "hanging", MeshOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Conformity(_)), "{e}");
    }
}
