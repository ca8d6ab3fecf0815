//! Conforming tetrahedral meshes with oriented face connectivity.
//!
//! Faces are numbered in order of first appearance when cells are visited
//! in index order, so the owner of every face is the lower-index cell. The
//! face normal points from the owner ("in" side) to the neighbor ("out"
//! side); on exterior faces it points out of the domain.

mod builder;
mod io;
mod locate;
pub mod quadrature;

use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

pub use builder::{build_box_mesh, build_box_mesh_with, BoxDomain};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use locate::CellLocator;

pub type Point = Vector3<f64>;

/// Local face `i` of a cell is opposite local vertex `i`.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub vertex_ids: [usize; 3],
    pub owner: usize,
    pub neighbor: Option<usize>,
    /// Unit normal, owner to neighbor.
    pub normal: Point,
    pub area: f64,
    pub centroid: Point,
}

impl Face {
    pub fn kind(&self) -> FaceKind {
        if self.neighbor.is_some() {
            FaceKind::Interior
        } else {
            FaceKind::Exterior
        }
    }

    pub fn is_interior(&self) -> bool {
        self.neighbor.is_some()
    }
}

/// Per-cell geometric data derived once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub volume: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// Global face index of local face `i` (opposite local vertex `i`).
    pub faces: [usize; 4],
    /// `+1` if the global face normal points out of this cell, `-1` otherwise.
    pub orientation: [f64; 4],
    /// Gradient of the Crouzeix-Raviart basis function of local face `i`,
    /// equal to `|F_i| / |E|` times the outward unit normal of that face.
    pub basis_gradients: [Point; 4],
    /// `A_E` in `E = h A_E Ẽ + a_E`, built from the edges at local vertex 0.
    pub affine_matrix: Matrix3<f64>,
    pub affine_offset: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Upper bound on the condition number of every `A_E`.
    pub shape_cap: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions { shape_cap: 10.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
    faces: Vec<Face>,
    geometry: Vec<CellGeometry>,
    interior_faces: Vec<usize>,
    exterior_faces: Vec<usize>,
    h: f64,
    options: MeshOptions,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.cells == other.cells && self.faces == other.faces
    }
}

impl Mesh {
    /// Builds a mesh from raw vertices and cells, fixing cell orientation and
    /// validating positivity, conformity and shape regularity.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<[usize; 4]>, options: MeshOptions) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidInput("mesh has no cells".into()));
        }
        let mut cells = cells;
        for (c, cell) in cells.iter_mut().enumerate() {
            for &v in cell.iter() {
                if v >= vertices.len() {
                    return Err(Error::InvalidInput(format!(
                        "cell {c} references vertex {v}, but there are only {} vertices",
                        vertices.len()
                    )));
                }
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    if cell[i] == cell[j] {
                        return Err(Error::InvalidInput(format!("cell {c} repeats vertex {}", cell[i])));
                    }
                }
            }
            let vol = signed_volume(&vertices, cell);
            if vol < 0.0 {
                cell.swap(2, 3);
            }
        }

        let mut lookup: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut cell_faces = vec![[0usize; 4]; cells.len()];
        for (c, cell) in cells.iter().enumerate() {
            for (i, local) in LOCAL_FACES.iter().enumerate() {
                let ids = [cell[local[0]], cell[local[1]], cell[local[2]]];
                let mut key = ids;
                key.sort_unstable();
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.neighbor.is_some() {
                            return Err(Error::Conformity(format!(
                                "face {key:?} is shared by more than two cells (cells {}, {} and {c})",
                                face.owner,
                                face.neighbor.unwrap()
                            )));
                        }
                        face.neighbor = Some(c);
                        cell_faces[c][i] = f;
                    }
                    None => {
                        let f = faces.len();
                        lookup.insert(key, f);
                        faces.push(Face {
                            vertex_ids: ids,
                            owner: c,
                            neighbor: None,
                            normal: Point::zeros(),
                            area: 0.0,
                            centroid: Point::zeros(),
                        });
                        cell_faces[c][i] = f;
                    }
                }
            }
        }

        for face in faces.iter_mut() {
            let [a, b, c] = face.vertex_ids.map(|v| vertices[v]);
            let cross = (b - a).cross(&(c - a));
            let norm = cross.norm();
            if norm == 0.0 {
                return Err(Error::InvalidInput(format!("face {:?} is degenerate", face.vertex_ids)));
            }
            face.area = 0.5 * norm;
            face.centroid = (a + b + c) / 3.0;
            let mut n = cross / norm;
            let owner_centroid = cell_centroid(&vertices, &cells[face.owner]);
            if n.dot(&(face.centroid - owner_centroid)) < 0.0 {
                n = -n;
            }
            face.normal = n;
        }

        let mut geometry = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let volume = signed_volume(&vertices, cell);
            if !(volume > 0.0) {
                return Err(Error::InvalidInput(format!("cell {c} has zero volume")));
            }
            let centroid = cell_centroid(&vertices, cell);
            let mut diameter: f64 = 0.0;
            for i in 0..4 {
                for j in i + 1..4 {
                    diameter = diameter.max((vertices[cell[i]] - vertices[cell[j]]).norm());
                }
            }
            let fids = cell_faces[c];
            let mut orientation = [0.0; 4];
            let mut basis_gradients = [Point::zeros(); 4];
            for i in 0..4 {
                let face = &faces[fids[i]];
                orientation[i] = if face.owner == c { 1.0 } else { -1.0 };
                basis_gradients[i] = face.normal * (orientation[i] * face.area / volume);
            }
            geometry.push(CellGeometry {
                volume,
                centroid,
                diameter,
                faces: fids,
                orientation,
                basis_gradients,
                affine_matrix: Matrix3::zeros(),
                affine_offset: vertices[cell[0]],
            });
        }
        let h = geometry.iter().map(|g| g.diameter).fold(0.0, f64::max);
        for (g, cell) in geometry.iter_mut().zip(&cells) {
            let v0 = vertices[cell[0]];
            g.affine_matrix = Matrix3::from_columns(&[
                (vertices[cell[1]] - v0) / h,
                (vertices[cell[2]] - v0) / h,
                (vertices[cell[3]] - v0) / h,
            ]);
        }

        let interior_faces = (0..faces.len()).filter(|&f| faces[f].is_interior()).collect();
        let exterior_faces = (0..faces.len()).filter(|&f| !faces[f].is_interior()).collect();
        let mesh = Mesh {
            vertices,
            cells,
            faces,
            geometry,
            interior_faces,
            exterior_faces,
            h,
            options,
        };
        mesh.check_shape_regularity()?;
        mesh.check_conformity()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 4]] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    pub fn cell_geometries(&self) -> &[CellGeometry] {
        &self.geometry
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn interior_faces(&self) -> &[usize] {
        &self.interior_faces
    }

    pub fn exterior_faces(&self) -> &[usize] {
        &self.exterior_faces
    }

    /// Maximum cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn options(&self) -> MeshOptions {
        self.options
    }

    pub fn cell_vertices(&self, c: usize) -> [Point; 4] {
        self.cells[c].map(|v| self.vertices[v])
    }

    /// Smallest axis-aligned box containing every vertex.
    pub fn bounding_box(&self) -> BoxDomain {
        let (min, max) = self.vertices.iter().fold(
            (Point::repeat(f64::INFINITY), Point::repeat(f64::NEG_INFINITY)),
            |(lo, hi), v| (lo.inf(v), hi.sup(v)),
        );
        BoxDomain::new(min, max)
    }

    pub fn total_volume(&self) -> f64 {
        self.geometry.iter().map(|g| g.volume).sum()
    }

    /// Volume enclosed by the exterior faces, by the divergence theorem.
    pub fn enclosed_volume(&self) -> f64 {
        self.exterior_faces
            .iter()
            .map(|&f| {
                let face = &self.faces[f];
                face.centroid.dot(&face.normal) * face.area / 3.0
            })
            .sum()
    }

    /// Cell across local face `i` of cell `c`, if any.
    pub fn neighbor_across(&self, c: usize, i: usize) -> Option<usize> {
        let face = &self.faces[self.geometry[c].faces[i]];
        if face.owner == c {
            face.neighbor
        } else {
            Some(face.owner)
        }
    }

    /// Barycentric coordinates of `x` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, x: &Point) -> [f64; 4] {
        let g = &self.geometry[c];
        let mut lambda = [0.0; 4];
        // λ_i = 1/4 - ∇φ_i · (x - x_c) / 3, since φ_i = 1 - 3 λ_i.
        for i in 0..4 {
            lambda[i] = 0.25 - g.basis_gradients[i].dot(&(x - g.centroid)) / 3.0;
        }
        lambda
    }

    /// Condition number of `A_E` for every cell.
    pub fn shape_condition_numbers(&self) -> Vec<f64> {
        self.geometry.iter().map(|g| condition_number(&g.affine_matrix)).collect()
    }

    fn check_shape_regularity(&self) -> Result<()> {
        for (c, cond) in self.shape_condition_numbers().into_iter().enumerate() {
            if !(cond <= self.options.shape_cap) {
                return Err(Error::ShapeRegularity {
                    cell: c,
                    condition: cond,
                    cap: self.options.shape_cap,
                });
            }
        }
        Ok(())
    }

    fn check_conformity(&self) -> Result<()> {
        let locator = CellLocator::new(self);
        for &f in &self.exterior_faces {
            let face = &self.faces[f];
            let eps = 1e-6 * face.area.sqrt();
            let probe = face.centroid + face.normal * eps;
            if let Some(other) = locator.locate(self, &probe, 1e-9) {
                if other != face.owner {
                    return Err(Error::Conformity(format!(
                        "boundary face {:?} of cell {} is covered by cell {} (hanging node or mismatched faces)",
                        face.vertex_ids, face.owner, other
                    )));
                }
            }
        }
        let total = self.total_volume();
        let enclosed = self.enclosed_volume();
        if (total - enclosed).abs() > 1e-12 * total.abs().max(enclosed.abs()) {
            return Err(Error::Conformity(format!(
                "cells overlap: total cell volume {total} differs from enclosed volume {enclosed}"
            )));
        }
        Ok(())
    }
}

fn signed_volume(vertices: &[Point], cell: &[usize; 4]) -> f64 {
    let [a, b, c, d] = cell.map(|v| vertices[v]);
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

fn cell_centroid(vertices: &[Point], cell: &[usize; 4]) -> Point {
    cell.iter().map(|&v| vertices[v]).sum::<Point>() / 4.0
}

fn condition_number(a: &Matrix3<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
