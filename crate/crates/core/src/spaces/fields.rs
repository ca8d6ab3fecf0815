use std::fmt::Debug;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::mesh::quadrature::{tet_degree2, TriangleRule};
use crate::mesh::{Mesh, Point};
use crate::{Error, Result};

/// Values a [`QField`] can hold: scalars, 3-vectors and 3x3 matrices.
pub trait FieldValue:
    Copy + Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync + 'static
{
    /// Number of scalar components.
    const DIM: usize;
    fn zero() -> Self;
    fn norm_squared(&self) -> f64;
    fn components(&self) -> Vec<f64>;
    fn from_components(c: &[f64]) -> Self;
}

impl FieldValue for f64 {
    const DIM: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn norm_squared(&self) -> f64 {
        self * self
    }
    fn components(&self) -> Vec<f64> {
        vec![*self]
    }
    fn from_components(c: &[f64]) -> Self {
        c[0]
    }
}

impl FieldValue for Vector3<f64> {
    const DIM: usize = 3;
    fn zero() -> Self {
        Vector3::zeros()
    }
    fn norm_squared(&self) -> f64 {
        Vector3::norm_squared(self)
    }
    fn components(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }
    fn from_components(c: &[f64]) -> Self {
        Vector3::new(c[0], c[1], c[2])
    }
}

impl FieldValue for Matrix3<f64> {
    const DIM: usize = 9;
    fn zero() -> Self {
        Matrix3::zeros()
    }
    fn norm_squared(&self) -> f64 {
        Matrix3::norm_squared(self)
    }
    /// Row-major.
    fn components(&self) -> Vec<f64> {
        self.transpose().as_slice().to_vec()
    }
    fn from_components(c: &[f64]) -> Self {
        Matrix3::from_row_slice(&c[..9])
    }
}

/// Piecewise-constant field, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QField<T: FieldValue = f64> {
    values: Vec<T>,
}

impl<T: FieldValue> QField<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        QField { values }
    }

    pub fn constant(mesh: &Mesh, value: T) -> Self {
        QField {
            values: vec![value; mesh.num_cells()],
        }
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self::constant(mesh, T::zero())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map<S: FieldValue>(&self, f: impl Fn(T) -> S) -> QField<S> {
        QField {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `∫ v dx`, summed in cell order.
    pub fn integral(&self, mesh: &Mesh) -> T {
        self.values
            .iter()
            .zip(mesh.cell_geometries())
            .fold(T::zero(), |acc, (&v, g)| acc + v * g.volume)
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.num_cells() {
            return Err(Error::MeshMismatch(format!(
                "field has {} cell values, mesh has {} cells",
                self.values.len(),
                mesh.num_cells()
            )));
        }
        Ok(())
    }

    /// Value at `x` in cell `c` (the cell is not checked).
    pub fn eval(&self, c: usize) -> T {
        self.values[c]
    }
}

impl QField<f64> {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl<T: FieldValue> Index<usize> for QField<T> {
    type Output = T;
    fn index(&self, c: usize) -> &T {
        &self.values[c]
    }
}

impl<T: FieldValue> IndexMut<usize> for QField<T> {
    fn index_mut(&mut self, c: usize) -> &mut T {
        &mut self.values[c]
    }
}

/// What `project_v` does with exterior-face degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Keep the face means of `f` (the field lies in `V_h`).
    Keep,
    /// Zero them (the field lies in `V_{0,h}`).
    #[default]
    Zero,
}

/// Crouzeix-Raviart vector field, one face-mean vector per face.
#[derive(Debug, Clone, PartialEq)]
pub struct CrField {
    dofs: Vec<Vector3<f64>>,
}

impl CrField {
    pub fn zeros(mesh: &Mesh) -> Self {
        CrField {
            dofs: vec![Vector3::zeros(); mesh.num_faces()],
        }
    }

    pub fn from_dofs(dofs: Vec<Vector3<f64>>) -> Self {
        CrField { dofs }
    }

    pub fn dofs(&self) -> &[Vector3<f64>] {
        &self.dofs
    }

    pub fn dofs_mut(&mut self) -> &mut [Vector3<f64>] {
        &mut self.dofs
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.dofs.len() != mesh.num_faces() {
            return Err(Error::MeshMismatch(format!(
                "field has {} face values, mesh has {} faces",
                self.dofs.len(),
                mesh.num_faces()
            )));
        }
        Ok(())
    }

    /// True if every exterior-face mean vanishes.
    pub fn is_in_v0(&self, mesh: &Mesh) -> bool {
        mesh.exterior_faces().iter().all(|&f| self.dofs[f] == Vector3::zeros())
    }

    pub fn zero_boundary(&mut self, mesh: &Mesh) {
        for &f in mesh.exterior_faces() {
            self.dofs[f] = Vector3::zeros();
        }
    }

    /// Mean of the field over face `f`.
    pub fn face_average(&self, f: usize) -> Vector3<f64> {
        self.dofs[f]
    }

    /// `⟨u · n⟩` on face `f`, with the face's global normal.
    pub fn normal_flux(&self, mesh: &Mesh, f: usize) -> f64 {
        self.dofs[f].dot(&mesh.face(f).normal)
    }

    /// `Π^Q u` on cell `c`: the mean of its four face values.
    pub fn cell_average(&self, mesh: &Mesh, c: usize) -> Vector3<f64> {
        let faces = mesh.geometry(c).faces;
        (self.dofs[faces[0]] + self.dofs[faces[1]] + self.dofs[faces[2]] + self.dofs[faces[3]]) * 0.25
    }

    pub fn cell_averages(&self, mesh: &Mesh) -> QField<Vector3<f64>> {
        QField::from_values((0..mesh.num_cells()).map(|c| self.cell_average(mesh, c)).collect())
    }

    /// Constant gradient on cell `c`, `G[a][b] = ∂_b u_a`.
    pub fn gradient(&self, mesh: &Mesh, c: usize) -> Matrix3<f64> {
        let g = mesh.geometry(c);
        let mut m = Matrix3::zeros();
        for i in 0..4 {
            m += self.dofs[g.faces[i]] * g.basis_gradients[i].transpose();
        }
        m
    }

    pub fn divergence(&self, mesh: &Mesh, c: usize) -> f64 {
        let g = mesh.geometry(c);
        (0..4).map(|i| self.dofs[g.faces[i]].dot(&g.basis_gradients[i])).sum()
    }

    pub fn broken_grad(&self, mesh: &Mesh) -> QField<Matrix3<f64>> {
        QField::from_values((0..mesh.num_cells()).map(|c| self.gradient(mesh, c)).collect())
    }

    pub fn broken_div(&self, mesh: &Mesh) -> QField<f64> {
        QField::from_values((0..mesh.num_cells()).map(|c| self.divergence(mesh, c)).collect())
    }

    /// Value of the cell-`c` representative at `x`.
    pub fn eval(&self, mesh: &Mesh, c: usize, x: &Point) -> Vector3<f64> {
        let g = mesh.geometry(c);
        let lambda = mesh.barycentric(c, x);
        (0..4).fold(Vector3::zeros(), |acc, i| acc + self.dofs[g.faces[i]] * (1.0 - 3.0 * lambda[i]))
    }

    /// Value of the cell-`c` representative at barycentric point `lambda`.
    pub fn eval_bary(&self, mesh: &Mesh, c: usize, lambda: &[f64; 4]) -> Vector3<f64> {
        let g = mesh.geometry(c);
        (0..4).fold(Vector3::zeros(), |acc, i| acc + self.dofs[g.faces[i]] * (1.0 - 3.0 * lambda[i]))
    }

    pub fn axpy(&mut self, alpha: f64, other: &CrField) {
        for (a, b) in self.dofs.iter_mut().zip(&other.dofs) {
            *a += b * alpha;
        }
    }
}

/// `Π^Q f`: cell averages by the degree-2 rule.
///
/// The four equal-weight samples are summed pairwise, so a function that is
/// constant on each cell is reproduced bit for bit.
pub fn project_q<T: FieldValue>(mesh: &Mesh, f: impl Fn(&Point) -> T) -> QField<T> {
    let rule = tet_degree2();
    let values = (0..mesh.num_cells())
        .map(|c| {
            let v = mesh.cell_vertices(c);
            let s: Vec<T> = rule
                .bary
                .iter()
                .map(|b| f(&(v[0] * b[0] + v[1] * b[1] + v[2] * b[2] + v[3] * b[3])))
                .collect();
            ((s[0] + s[1]) + (s[2] + s[3])) * 0.25
        })
        .collect();
    QField::from_values(values)
}

/// `Π^V f`: face means by the degree-2 (edge-midpoint) rule.
pub fn project_v(mesh: &Mesh, f: impl Fn(&Point) -> Vector3<f64>, policy: BoundaryPolicy) -> CrField {
    let rule = TriangleRule::new(2);
    let mut dofs: Vec<Vector3<f64>> = mesh
        .faces()
        .iter()
        .map(|face| {
            let corners = face.vertex_ids.map(|v| mesh.vertices()[v]);
            rule.map(&corners, 1.0).fold(Vector3::zeros(), |acc, (x, w)| acc + f(&x) * w)
        })
        .collect();
    if policy == BoundaryPolicy::Zero {
        for &fid in mesh.exterior_faces() {
            dofs[fid] = Vector3::zeros();
        }
    }
    CrField { dofs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, BoxDomain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube(n: usize) -> Mesh {
        build_box_mesh(&BoxDomain::unit(), [n, n, n]).unwrap()
    }

    fn affine(x: &Point) -> Vector3<f64> {
        let b = Matrix3::new(1.0, -2.0, 0.5, 0.3, 0.0, 4.0, -1.0, 2.5, 1.5);
        b * x + Vector3::new(0.1, -0.2, 0.3)
    }

    #[test]
    fn project_q_of_constant_and_affine() {
        let mesh = cube(2);
        let q = project_q(&mesh, |_| 2.5);
        assert!(q.values().iter().all(|&v| v == 2.5));
        let q = project_q(&mesh, |x| 3.0 * x.x - x.y + 0.5 * x.z);
        for c in 0..mesh.num_cells() {
            let xc = mesh.geometry(c).centroid;
            assert!((q[c] - (3.0 * xc.x - xc.y + 0.5 * xc.z)).abs() < 1e-14);
        }
    }

    #[test]
    fn project_q_integrates_x_squared() {
        let mesh = cube(1);
        let q = project_q(&mesh, |x| x.x * x.x);
        assert!((q.integral(&mesh) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn project_q_is_idempotent_bitwise() {
        let mesh = cube(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let field = QField::from_values((0..mesh.num_cells()).map(|_| rng.gen::<f64>() * 1e3 - 17.0).collect());
        let locator = crate::mesh::CellLocator::new(&mesh);
        // Evaluate the field as a function: interior quadrature points are
        // located uniquely in their cell.
        let again = project_q(&mesh, |x| field[locator.locate(&mesh, x, 0.0).unwrap()]);
        assert_eq!(again, field);
    }

    #[test]
    fn project_v_reproduces_affine_fields() {
        let mesh = cube(2);
        let u = project_v(&mesh, affine, BoundaryPolicy::Keep);
        let b = Matrix3::new(1.0, -2.0, 0.5, 0.3, 0.0, 4.0, -1.0, 2.5, 1.5);
        for c in 0..mesh.num_cells() {
            assert!((u.gradient(&mesh, c) - b).abs().max() < 1e-12);
            for v in mesh.cell_vertices(c) {
                assert!((u.eval(&mesh, c, &v) - affine(&v)).abs().max() < 1e-13);
            }
            let xc = mesh.geometry(c).centroid;
            assert!((u.cell_average(&mesh, c) - affine(&xc)).abs().max() < 1e-13);
            assert!((u.divergence(&mesh, c) - b.trace()).abs() < 1e-12);
        }
    }

    #[test]
    fn project_v_zero_policy() {
        let mesh = cube(2);
        let u = project_v(&mesh, affine, BoundaryPolicy::Zero);
        assert!(u.is_in_v0(&mesh));
        let z = project_v(&mesh, |_| Vector3::zeros(), BoundaryPolicy::Keep);
        assert!(z.dofs().iter().all(|d| *d == Vector3::zeros()));
    }

    #[test]
    fn divergence_of_v0_field_integrates_to_zero() {
        let mesh = cube(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut u = CrField::from_dofs(
            (0..mesh.num_faces())
                .map(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        u.zero_boundary(&mesh);
        let total = u.broken_div(&mesh).integral(&mesh);
        // Oracle: sum of face fluxes over all cell boundaries.
        let mut flux = 0.0;
        for g in mesh.cell_geometries() {
            for i in 0..4 {
                let face = mesh.face(g.faces[i]);
                flux += face.area * g.orientation[i] * u.dofs()[g.faces[i]].dot(&face.normal);
            }
        }
        assert!(total.abs() < 1e-12);
        assert!((total - flux).abs() < 1e-12);
    }

    #[test]
    fn basis_function_face_means() {
        // φ_i has mean 1 on face i and 0 on the other faces.
        let mesh = cube(1);
        let rule = TriangleRule::new(2);
        for c in 0..mesh.num_cells() {
            let g = mesh.geometry(c);
            for i in 0..4 {
                let mut dofs = vec![Vector3::zeros(); mesh.num_faces()];
                dofs[g.faces[i]] = Vector3::new(1.0, 0.0, 0.0);
                let u = CrField::from_dofs(dofs);
                for j in 0..4 {
                    let face = mesh.face(g.faces[j]);
                    let corners = face.vertex_ids.map(|v| mesh.vertices()[v]);
                    let mean: f64 = rule.map(&corners, 1.0).map(|(x, w)| w * u.eval(&mesh, c, &x).x).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((mean - expect).abs() < 1e-13);
                }
            }
        }
    }
}
