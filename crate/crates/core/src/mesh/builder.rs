use super::{Mesh, MeshOptions, Point};
use crate::{Error, Result};

/// Axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub min: Point,
    pub max: Point,
}

impl BoxDomain {
    pub fn new(min: Point, max: Point) -> Self {
        BoxDomain { min, max }
    }

    /// Box `[0, lx] × [0, ly] × [0, lz]`.
    pub fn from_extents(extents: [f64; 3]) -> Self {
        BoxDomain {
            min: Point::zeros(),
            max: Point::from(extents),
        }
    }

    pub fn unit() -> Self {
        Self::from_extents([1.0, 1.0, 1.0])
    }

    pub fn lengths(&self) -> Point {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..3).all(|d| x[d] >= self.min[d] && x[d] <= self.max[d])
    }

    /// True if `self` lies inside `other` (closed containment).
    pub fn is_inside(&self, other: &BoxDomain) -> bool {
        other.contains(&self.min) && other.contains(&self.max)
    }
}

// Kuhn triangulation: each hexahedron is split into the 6 tetrahedra
// v0 → v0+e_p0 → v0+e_p0+e_p1 → v0+1, one per axis permutation p. The same
// pattern in every hexahedron makes the whole mesh conforming.
const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn build_box_mesh(domain: &BoxDomain, n: [usize; 3]) -> Result<Mesh> {
    build_box_mesh_with(domain, n, MeshOptions::default())
}

pub fn build_box_mesh_with(domain: &BoxDomain, n: [usize; 3], options: MeshOptions) -> Result<Mesh> {
    if n.iter().any(|&k| k == 0) {
        return Err(Error::InvalidInput(format!("cells per axis must be >= 1, got {n:?}")));
    }
    let len = domain.lengths();
    if !len.iter().all(|&l| l.is_finite() && l > 0.0) {
        return Err(Error::InvalidInput(format!(
            "degenerate box extents: min {:?}, max {:?}",
            domain.min.as_slice(),
            domain.max.as_slice()
        )));
    }
    let [nx, ny, nz] = n;
    let index = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(Point::new(
                    domain.min.x + len.x * i as f64 / nx as f64,
                    domain.min.y + len.y * j as f64 / ny as f64,
                    domain.min.z + len.z * k as f64 / nz as f64,
                ));
            }
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for perm in PERMUTATIONS {
                    let mut corner = [i, j, k];
                    let mut tet = [index(i, j, k); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        corner[axis] += 1;
                        tet[step + 1] = index(corner[0], corner[1], corner[2]);
                    }
                    cells.push(tet);
                }
            }
        }
    }
    Mesh::from_cells(vertices, cells, options)
}
