use nalgebra::Vector3;

use super::{CrField, FieldValue, QField};
use crate::mesh::quadrature::{TetRule, TriangleRule};
use crate::mesh::Mesh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// Accepts `1 ≤ p < ∞` and `p = ∞`.
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::UnsupportedExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    Lp(f64),
    /// `‖∇_h v‖_{L²}`.
    BrokenH1,
    /// `(Σ_{Γ int} ∫_Γ |⟦v⟧|² / h)^{1/2}`.
    FaceJump,
}

#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a QField<f64>),
    Vector(&'a QField<Vector3<f64>>),
    Cr(&'a CrField),
}

pub fn broken_norm(mesh: &Mesh, field: FieldRef<'_>, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Lp(p) => {
            let p = Exponent::new(p)?;
            Ok(match field {
                FieldRef::Scalar(v) => q_lp_norm(mesh, v, p),
                FieldRef::Vector(v) => q_lp_norm(mesh, v, p),
                FieldRef::Cr(u) => cr_lp_norm(mesh, u, p),
            })
        }
        NormKind::BrokenH1 => Ok(match field {
            FieldRef::Scalar(_) | FieldRef::Vector(_) => 0.0,
            FieldRef::Cr(u) => broken_h1_seminorm(mesh, u),
        }),
        NormKind::FaceJump => Ok(match field {
            FieldRef::Scalar(v) => q_face_jump_seminorm(mesh, v),
            FieldRef::Vector(v) => q_face_jump_seminorm(mesh, v),
            FieldRef::Cr(u) => face_jump_seminorm(mesh, u),
        }),
    }
}

pub fn q_lp_norm<T: FieldValue>(mesh: &Mesh, v: &QField<T>, p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => v.values().iter().map(|x| x.norm_squared().sqrt()).fold(0.0, f64::max),
        Exponent::Finite(p) => v
            .values()
            .iter()
            .zip(mesh.cell_geometries())
            .map(|(x, g)| g.volume * x.norm_squared().powf(0.5 * p))
            .sum::<f64>()
            .powf(1.0 / p),
    }
}

/// Rule degree for `|u|^p` with `u` affine: exact when `p` is an even
/// integer, otherwise a fixed high degree.
fn power_rule(p: f64) -> TetRule {
    if p.fract() == 0.0 && p as u32 % 2 == 0 && p <= 12.0 {
        TetRule::new(p as u32)
    } else {
        TetRule::collapsed(10)
    }
}

pub fn cr_lp_norm(mesh: &Mesh, u: &CrField, p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => (0..mesh.num_cells())
            .map(|c| {
                mesh.cell_vertices(c)
                    .iter()
                    .map(|x| u.eval(mesh, c, x).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let rule = power_rule(p);
            let mut total = 0.0;
            for c in 0..mesh.num_cells() {
                let vol = mesh.geometry(c).volume;
                for (b, w) in rule.bary.iter().zip(&rule.weights) {
                    total += w * vol * u.eval_bary(mesh, c, b).norm_squared().powf(0.5 * p);
                }
            }
            total.powf(1.0 / p)
        }
    }
}

pub fn broken_h1_seminorm(mesh: &Mesh, u: &CrField) -> f64 {
    (0..mesh.num_cells())
        .map(|c| mesh.geometry(c).volume * u.gradient(mesh, c).norm_squared())
        .sum::<f64>()
        .sqrt()
}

pub fn face_jump_seminorm(mesh: &Mesh, u: &CrField) -> f64 {
    let rule = TriangleRule::new(2);
    let h = mesh.h();
    let mut total = 0.0;
    for &f in mesh.interior_faces() {
        let face = mesh.face(f);
        let nb = face.neighbor.unwrap();
        let corners = face.vertex_ids.map(|v| mesh.vertices()[v]);
        for (x, w) in rule.map(&corners, face.area) {
            let jump = u.eval(mesh, nb, &x) - u.eval(mesh, face.owner, &x);
            total += w * jump.norm_squared() / h;
        }
    }
    total.sqrt()
}

pub fn q_face_jump_seminorm<T: FieldValue>(mesh: &Mesh, v: &QField<T>) -> f64 {
    let h = mesh.h();
    mesh.interior_faces()
        .iter()
        .map(|&f| {
            let face = mesh.face(f);
            face.area * (v[face.neighbor.unwrap()] - v[face.owner]).norm_squared() / h
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, BoxDomain, Point};
    use crate::spaces::{project_v, BoundaryPolicy};

    fn cube(n: usize) -> Mesh {
        build_box_mesh(&BoxDomain::unit(), [n, n, n]).unwrap()
    }

    #[test]
    fn constant_field_norms() {
        let mesh = cube(2);
        let v = QField::constant(&mesh, -3.0);
        for p in [1.0, 1.4, 2.0, 6.0] {
            assert!((q_lp_norm(&mesh, &v, Exponent::new(p).unwrap()) - 3.0).abs() < 1e-13);
        }
        assert_eq!(q_lp_norm(&mesh, &v, Exponent::Infinity), 3.0);
        let u = project_v(&mesh, |_| Vector3::new(3.0, 4.0, 0.0), BoundaryPolicy::Keep);
        assert!((cr_lp_norm(&mesh, &u, Exponent::Finite(2.0)) - 5.0).abs() < 1e-13);
        assert!((cr_lp_norm(&mesh, &u, Exponent::Infinity) - 5.0).abs() < 1e-13);
        assert!(broken_h1_seminorm(&mesh, &u) < 1e-13);
        assert!(face_jump_seminorm(&mesh, &u) < 1e-13);
    }

    #[test]
    fn unsupported_exponents() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::new(-1.0).is_err());
        let mesh = cube(1);
        let v = QField::constant(&mesh, 1.0);
        assert!(matches!(
            broken_norm(&mesh, FieldRef::Scalar(&v), NormKind::Lp(0.0)),
            Err(Error::UnsupportedExponent(_))
        ));
    }

    #[test]
    fn l6_norm_of_affine_field_is_exact() {
        // ∫_{[0,1]^3} x^6 = 1/7
        let mesh = cube(2);
        let u = project_v(&mesh, |x: &Point| Vector3::new(x.x, 0.0, 0.0), BoundaryPolicy::Keep);
        let l6 = cr_lp_norm(&mesh, &u, Exponent::Finite(6.0));
        assert!((l6.powi(6) - 1.0 / 7.0).abs() < 1e-13);
        assert!((broken_h1_seminorm(&mesh, &u) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn face_jump_of_continuous_projection_stays_bounded() {
        let f = |x: &Point| {
            let s = (std::f64::consts::PI * x.x).sin() * (std::f64::consts::PI * x.y).sin();
            Vector3::new(s, s * x.z, 0.0)
        };
        let j: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&n| {
                let mesh = cube(n);
                face_jump_seminorm(&mesh, &project_v(&mesh, f, BoundaryPolicy::Keep))
            })
            .collect();
        assert!(j[2] <= j[1] * 1.05 && j[1] <= j[0] * 1.05, "{j:?}");
    }
}
