use nalgebra::Vector3;

use super::{CrField, FieldValue, QField};
use crate::mesh::quadrature::TriangleRule;
use crate::mesh::{Mesh, Point};
use crate::{Error, Result};

/// Inner and outer traces of a field on one face, at the degree-2 face
/// quadrature points. `in` is the owner side, `out` the neighbor side.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceTracePair<T> {
    pub face: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub inner: Vec<T>,
    outer: Option<Vec<T>>,
}

impl<T: FieldValue> FaceTracePair<T> {
    pub fn outer(&self) -> Result<&[T]> {
        self.outer.as_deref().ok_or(Error::ExteriorFace(self.face))
    }

    /// `⟦v⟧ = v^out - v^in`.
    pub fn jump(&self) -> Result<Vec<T>> {
        let outer = self.outer()?;
        Ok(outer.iter().zip(&self.inner).map(|(&o, &i)| o - i).collect())
    }

    /// `⟨⟨v⟩⟩ = (v^out + v^in) / 2`.
    pub fn average(&self) -> Result<Vec<T>> {
        let outer = self.outer()?;
        Ok(outer.iter().zip(&self.inner).map(|(&o, &i)| (o + i) * 0.5).collect())
    }

    /// Quadrature mean of `values` over the face.
    pub fn mean(&self, values: &[T]) -> T {
        values.iter().zip(&self.weights).fold(T::zero(), |acc, (&v, &w)| acc + v * w)
    }
}

fn face_rule(mesh: &Mesh, face: usize) -> (Vec<Point>, Vec<f64>) {
    let f = mesh.face(face);
    let corners = f.vertex_ids.map(|v| mesh.vertices()[v]);
    TriangleRule::new(2).map(&corners, 1.0).unzip()
}

pub fn q_traces<T: FieldValue>(mesh: &Mesh, v: &QField<T>, face: usize) -> FaceTracePair<T> {
    let f = mesh.face(face);
    let (points, weights) = face_rule(mesh, face);
    let n = points.len();
    FaceTracePair {
        face,
        inner: vec![v[f.owner]; n],
        outer: f.neighbor.map(|nb| vec![v[nb]; n]),
        points,
        weights,
    }
}

pub fn cr_traces(mesh: &Mesh, v: &CrField, face: usize) -> FaceTracePair<Vector3<f64>> {
    let f = mesh.face(face);
    let (points, weights) = face_rule(mesh, face);
    let side = |c: usize| points.iter().map(|x| v.eval(mesh, c, x)).collect::<Vec<_>>();
    FaceTracePair {
        face,
        inner: side(f.owner),
        outer: f.neighbor.map(side),
        points: points.clone(),
        weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, BoxDomain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_qfield_has_zero_jump() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let v = QField::constant(&mesh, 4.0);
        for &f in mesh.interior_faces() {
            let t = q_traces(&mesh, &v, f);
            assert!(t.jump().unwrap().iter().all(|&j| j == 0.0));
            assert!(t.average().unwrap().iter().all(|&a| a == 4.0));
        }
    }

    #[test]
    fn owner_neighbor_values() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let f = mesh.interior_faces()[0];
        let face = mesh.face(f);
        let mut v = QField::zeros(&mesh);
        v[face.owner] = 1.0;
        v[face.neighbor.unwrap()] = 3.0;
        let t = q_traces(&mesh, &v, f);
        assert!(t.jump().unwrap().iter().all(|&j| j == 2.0));
        assert!(t.average().unwrap().iter().all(|&a| a == 2.0));
        for (j, (i, a)) in t.jump().unwrap().iter().zip(t.inner.iter().zip(t.average().unwrap())) {
            assert_eq!(j + 2.0 * i, 2.0 * a);
        }
    }

    #[test]
    fn exterior_face_has_no_outer_trace() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let f = mesh.exterior_faces()[0];
        let t = q_traces(&mesh, &QField::constant(&mesh, 1.0), f);
        assert!(matches!(t.outer(), Err(Error::ExteriorFace(g)) if g == f));
        assert!(t.jump().is_err());
        assert_eq!(t.inner.len(), 3);
    }

    #[test]
    fn cr_face_means_agree_across_faces() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = CrField::from_dofs(
            (0..mesh.num_faces())
                .map(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        for &f in mesh.interior_faces() {
            let t = cr_traces(&mesh, &u, f);
            let mi = t.mean(&t.inner);
            let mo = t.mean(t.outer().unwrap());
            assert!((mi - mo).norm() < 1e-13);
            assert!((mi - u.face_average(f)).norm() < 1e-13);
        }
    }
}
