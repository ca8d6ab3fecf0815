//! Quadrature on triangles and tetrahedra.
//!
//! Rules are stored in barycentric coordinates with weights normalised to
//! sum to one; mapping to a physical simplex multiplies by its measure.
//! Degrees 1 and 2 use the classical centroid and midpoint/4-point rules;
//! higher degrees use collapsed (Duffy) Gauss-Legendre products.

use std::sync::OnceLock;

use super::{Mesh, Point};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub bary: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TetRule {
    pub bary: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        dp = if d != 0.0 { d } else { dp };
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl TriangleRule {
    pub fn new(degree: u32) -> Self {
        match degree {
            0 | 1 => TriangleRule {
                bary: vec![[1.0 / 3.0; 3]],
                weights: vec![1.0],
            },
            2 => TriangleRule {
                bary: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
                weights: vec![1.0 / 3.0; 3],
            },
            _ => Self::collapsed(degree),
        }
    }

    /// Exact for polynomials of total degree `degree`.
    pub fn collapsed(degree: u32) -> Self {
        let m = (degree as usize + 2).div_ceil(2);
        let (x, w) = gauss_legendre(m);
        let mut bary = Vec::with_capacity(m * m);
        let mut weights = Vec::with_capacity(m * m);
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                let l1 = u;
                let l2 = v * (1.0 - u);
                bary.push([1.0 - l1 - l2, l1, l2]);
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        TriangleRule { bary, weights }
    }

    pub fn map(&self, corners: &[Point; 3], area: f64) -> impl Iterator<Item = (Point, f64)> + '_ {
        let corners = *corners;
        self.bary.iter().zip(&self.weights).map(move |(b, &w)| {
            (corners[0] * b[0] + corners[1] * b[1] + corners[2] * b[2], w * area)
        })
    }
}

impl TetRule {
    pub fn new(degree: u32) -> Self {
        match degree {
            0 | 1 => TetRule {
                bary: vec![[0.25; 4]],
                weights: vec![1.0],
            },
            2 => {
                let a = 0.585_410_196_624_968_5;
                let b = 0.138_196_601_125_010_5;
                TetRule {
                    bary: vec![[a, b, b, b], [b, a, b, b], [b, b, a, b], [b, b, b, a]],
                    weights: vec![0.25; 4],
                }
            }
            _ => Self::collapsed(degree),
        }
    }

    /// Exact for polynomials of total degree `degree`.
    pub fn collapsed(degree: u32) -> Self {
        let m = (degree as usize + 3).div_ceil(2);
        let (x, w) = gauss_legendre(m);
        let mut bary = Vec::with_capacity(m * m * m);
        let mut weights = Vec::with_capacity(m * m * m);
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                for (&s, &ws) in x.iter().zip(&w) {
                    let l1 = u;
                    let l2 = v * (1.0 - u);
                    let l3 = s * (1.0 - u) * (1.0 - v);
                    bary.push([1.0 - l1 - l2 - l3, l1, l2, l3]);
                    weights.push(6.0 * wu * wv * ws * (1.0 - u) * (1.0 - u) * (1.0 - v));
                }
            }
        }
        TetRule { bary, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Cached degree-2 tetrahedral rule used throughout the scheme.
pub fn tet_degree2() -> &'static TetRule {
    static RULE: OnceLock<TetRule> = OnceLock::new();
    RULE.get_or_init(|| TetRule::new(2))
}

/// Points and weights of `rule` mapped to cell `c`.
pub fn cell_points<'a>(mesh: &'a Mesh, c: usize, rule: &'a TetRule) -> impl Iterator<Item = (Point, f64)> + 'a {
    let verts = mesh.cell_vertices(c);
    let vol = mesh.geometry(c).volume;
    rule.bary.iter().zip(&rule.weights).map(move |(b, &w)| {
        (verts[0] * b[0] + verts[1] * b[1] + verts[2] * b[2] + verts[3] * b[3], w * vol)
    })
}

/// Face quadrature of degree 1 (centroid) or 2 (edge midpoints).
pub fn face_quadrature(mesh: &Mesh, face: usize, degree: u32) -> Result<Vec<(Point, f64)>> {
    if !(1..=2).contains(&degree) {
        return Err(Error::UnsupportedDegree(degree));
    }
    Ok(face_points(mesh, face, &TriangleRule::new(degree)).collect())
}

pub fn face_points<'a>(mesh: &'a Mesh, face: usize, rule: &'a TriangleRule) -> impl Iterator<Item = (Point, f64)> + 'a {
    let f = mesh.face(face);
    let corners = f.vertex_ids.map(|v| mesh.vertices()[v]);
    rule.map(&corners, f.area)
}
