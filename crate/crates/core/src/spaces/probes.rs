//! Empirical constants for the discrete inverse, trace, Poincaré and
//! Sobolev inequalities.
//!
//! Each ratio is the left side divided by the right side of the inequality
//! without its constant; a probe reports the largest ratio over a family of
//! fields. The family always contains the single-cell (resp. single-face)
//! spikes, which are the extremal fields for the scaling arguments, plus
//! smooth projections and seeded random fields.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::norms::{broken_h1_seminorm, cr_lp_norm, q_face_jump_seminorm, q_lp_norm, Exponent};
use super::{project_q, project_v, BoundaryPolicy, CrField, QField};
use crate::mesh::quadrature::TetRule;
use crate::mesh::{Mesh, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeValue {
    pub name: String,
    pub constant: f64,
}

/// `‖v‖_{L^p} / (h^{3(1/p - 1/q)} ‖v‖_{L^q})`, `q ≤ p`.
pub fn inverse_ratio(mesh: &Mesh, v: &QField, p: Exponent, q: Exponent) -> f64 {
    let scale = mesh.h().powf(3.0 * (1.0 / p.value() - 1.0 / q.value()));
    q_lp_norm(mesh, v, p) / (scale * q_lp_norm(mesh, v, q))
}

/// Largest `‖v‖_{L^p(Γ)} / (h^{-1/p} ‖v‖_{L^p(E)})` over cells `E` with
/// `v_E ≠ 0` and faces `Γ ⊂ ∂E`.
pub fn trace_ratio(mesh: &Mesh, v: &QField, p: Exponent) -> f64 {
    let h = mesh.h();
    let mut worst: f64 = 0.0;
    for c in 0..mesh.num_cells() {
        if v[c] == 0.0 {
            continue;
        }
        let g = mesh.geometry(c);
        for &f in &g.faces {
            let r = match p {
                Exponent::Infinity => 1.0,
                Exponent::Finite(p) => (mesh.face(f).area * h / g.volume).powf(1.0 / p),
            };
            worst = worst.max(r);
        }
    }
    worst
}

/// `‖u - Π^Q u‖²_{L²(E)}` for one cell.
fn cell_fluctuation_sq(mesh: &Mesh, u: &CrField, c: usize) -> f64 {
    let g = mesh.geometry(c);
    let m = fluctuation_matrix(g.volume);
    let d = g.faces.map(|f| u.dofs()[f]);
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += m[(i, j)] * d[i].dot(&d[j]);
        }
    }
    s.max(0.0)
}

/// `∫_E (φ_i - 1/4)(φ_j - 1/4)`, using `∫ λ_i λ_j = |E| (1 + δ_ij) / 20`.
fn fluctuation_matrix(volume: f64) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        9.0 * volume * ((1.0 + delta) / 20.0 - 1.0 / 16.0)
    })
}

/// Largest per-cell `‖u - Π^Q u‖_{L²(E)} / (h ‖∇u‖_{L²(E)})`.
pub fn poincare_ratio(mesh: &Mesh, u: &CrField) -> f64 {
    let h = mesh.h();
    let mut worst: f64 = 0.0;
    for c in 0..mesh.num_cells() {
        let grad = mesh.geometry(c).volume * u.gradient(mesh, c).norm_squared();
        if grad > 1e-300 {
            worst = worst.max((cell_fluctuation_sq(mesh, u, c) / grad).sqrt() / h);
        }
    }
    worst
}

/// Supremum of the per-cell Poincaré ratio over all of `V_h`, from the
/// generalized eigenproblem of the two quadratic forms on each cell.
pub fn poincare_constant(mesh: &Mesh) -> f64 {
    let basis = nalgebra::Matrix4x3::new(1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0);
    let h = mesh.h();
    let mut worst: f64 = 0.0;
    for g in mesh.cell_geometries() {
        let m = fluctuation_matrix(g.volume);
        let k = Matrix4::from_fn(|i, j| g.volume * g.basis_gradients[i].dot(&g.basis_gradients[j]));
        let mt: Matrix3<f64> = basis.transpose() * m * basis;
        let kt: Matrix3<f64> = basis.transpose() * k * basis;
        let l = kt.cholesky().expect("gradient form is definite off constants").l();
        let li = l.try_inverse().unwrap();
        let c = li * mt * li.transpose();
        let lmax = SymmetricEigen::new((c + c.transpose()) * 0.5).eigenvalues.max();
        worst = worst.max(lmax.sqrt() / h);
    }
    worst
}

/// `‖v‖²_{L⁶} / (Σ_Γ ∫_Γ ⟦v⟧²/h + ‖v‖²_{L²})` for `v ∈ Q_h`.
pub fn sobolev_q_ratio(mesh: &Mesh, v: &QField) -> f64 {
    let num = q_lp_norm(mesh, v, Exponent::Finite(6.0)).powi(2);
    let den = q_face_jump_seminorm(mesh, v).powi(2) + q_lp_norm(mesh, v, Exponent::Finite(2.0)).powi(2);
    num / den
}

/// `‖u‖²_{L⁶} / ‖∇_h u‖²_{L²}` for `u ∈ V_{0,h}`.
pub fn sobolev_cr_ratio(mesh: &Mesh, u: &CrField) -> f64 {
    cr_lp_norm(mesh, u, Exponent::Finite(6.0)).powi(2) / broken_h1_seminorm(mesh, u).powi(2)
}

fn spike_sobolev_q(mesh: &Mesh) -> f64 {
    let h = mesh.h();
    let mut worst: f64 = 0.0;
    for c in 0..mesh.num_cells() {
        let g = mesh.geometry(c);
        let jumps: f64 = g
            .faces
            .iter()
            .filter(|&&f| mesh.face(f).is_interior())
            .map(|&f| mesh.face(f).area / h)
            .sum();
        worst = worst.max(g.volume.powf(1.0 / 3.0) / (jumps + g.volume));
    }
    worst
}

fn spike_sobolev_cr(mesh: &Mesh) -> f64 {
    let rule = TetRule::new(6);
    let mut worst: f64 = 0.0;
    for &f in mesh.interior_faces() {
        let face = mesh.face(f);
        let mut l6 = 0.0;
        let mut grad = 0.0;
        for c in [face.owner, face.neighbor.unwrap()] {
            let g = mesh.geometry(c);
            let i = g.faces.iter().position(|&x| x == f).unwrap();
            grad += g.volume * g.basis_gradients[i].norm_squared();
            l6 += rule
                .bary
                .iter()
                .zip(&rule.weights)
                .map(|(b, w)| w * g.volume * (1.0 - 3.0 * b[i]).powi(6))
                .sum::<f64>();
        }
        worst = worst.max(l6.powf(1.0 / 3.0) / grad);
    }
    worst
}

fn smooth_scalar(x: &Point) -> f64 {
    use std::f64::consts::PI;
    1.0 + 0.5 * (PI * x.x).sin() * (2.0 * PI * x.y).cos() * (PI * x.z).sin()
}

fn smooth_vector(x: &Point) -> Vector3<f64> {
    use std::f64::consts::PI;
    let s = |t: f64| (PI * t).sin();
    let b = s(x.x) * s(x.y) * s(x.z);
    Vector3::new(b, b * (2.0 * PI * x.x).cos(), s(x.x).powi(2) * s(x.y) * s(2.0 * x.z))
}

/// All probe constants on `mesh`, each the maximum over its field family.
pub fn probe_constants(mesh: &Mesh, seed: u64) -> Vec<ProbeValue> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.num_cells();
    let mut scalar_fields = vec![
        QField::constant(mesh, 1.0),
        project_q(mesh, smooth_scalar),
        QField::from_values((0..n).map(|_| rng.gen_range(0.5..2.0)).collect()),
        QField::from_values((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()),
    ];
    let mut spike = QField::zeros(mesh);
    spike[n / 2] = 1.0;
    scalar_fields.push(spike);

    let mut random_cr = CrField::from_dofs(
        (0..mesh.num_faces())
            .map(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    );
    random_cr.zero_boundary(mesh);
    let cr_fields = [project_v(mesh, smooth_vector, BoundaryPolicy::Zero), random_cr];

    let mut out = Vec::new();
    let inf = Exponent::Infinity;
    let pairs = [
        ("inverse L2/L1", Exponent::Finite(2.0), Exponent::Finite(1.0)),
        ("inverse L6/L2", Exponent::Finite(6.0), Exponent::Finite(2.0)),
        ("inverse Linf/L2", inf, Exponent::Finite(2.0)),
        ("inverse Linf/L1.4", inf, Exponent::Finite(1.4)),
    ];
    for (name, p, q) in pairs {
        let constant = scalar_fields
            .iter()
            .map(|v| inverse_ratio(mesh, v, p, q))
            .fold(0.0, f64::max);
        out.push(ProbeValue {
            name: name.into(),
            constant,
        });
    }
    for (name, p) in [
        ("trace L1", Exponent::Finite(1.0)),
        ("trace L2", Exponent::Finite(2.0)),
        ("trace L6", Exponent::Finite(6.0)),
    ] {
        let constant = scalar_fields.iter().map(|v| trace_ratio(mesh, v, p)).fold(0.0, f64::max);
        out.push(ProbeValue {
            name: name.into(),
            constant,
        });
    }
    let poincare = cr_fields
        .iter()
        .map(|u| poincare_ratio(mesh, u))
        .fold(poincare_constant(mesh), f64::max);
    out.push(ProbeValue {
        name: "poincare".into(),
        constant: poincare,
    });
    let sobolev_q = scalar_fields
        .iter()
        .map(|v| sobolev_q_ratio(mesh, v))
        .fold(spike_sobolev_q(mesh), f64::max);
    out.push(ProbeValue {
        name: "sobolev Q_h".into(),
        constant: sobolev_q,
    });
    let sobolev_cr = cr_fields
        .iter()
        .map(|u| sobolev_cr_ratio(mesh, u))
        .fold(spike_sobolev_cr(mesh), f64::max);
    out.push(ProbeValue {
        name: "sobolev V_0h".into(),
        constant: sobolev_cr,
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, BoxDomain};

    #[test]
    fn poincare_constant_bounds_every_field() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let sup = poincare_constant(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let u = CrField::from_dofs(
                (0..mesh.num_faces())
                    .map(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0))
                    .collect(),
            );
            assert!(poincare_ratio(&mesh, &u) <= sup * (1.0 + 1e-12));
        }
    }

    #[test]
    fn fluctuation_matches_quadrature() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let u = project_v(&mesh, |x| Vector3::new(x.x * x.y, x.z, 1.0), BoundaryPolicy::Keep);
        let rule = TetRule::new(2);
        for c in 0..mesh.num_cells() {
            let avg = u.cell_average(&mesh, c);
            let vol = mesh.geometry(c).volume;
            let q: f64 = rule
                .bary
                .iter()
                .zip(&rule.weights)
                .map(|(b, w)| w * vol * (u.eval_bary(&mesh, c, b) - avg).norm_squared())
                .sum();
            assert!((q - cell_fluctuation_sq(&mesh, &u, c)).abs() < 1e-14);
        }
    }

    #[test]
    fn spike_ratios_match_generic_path() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let mut worst: f64 = 0.0;
        for c in 0..mesh.num_cells() {
            let mut v = QField::zeros(&mesh);
            v[c] = 1.0;
            worst = worst.max(sobolev_q_ratio(&mesh, &v));
        }
        assert!((worst - spike_sobolev_q(&mesh)).abs() < 1e-12 * worst);
        let mut worst: f64 = 0.0;
        for &f in mesh.interior_faces() {
            let mut u = CrField::zeros(&mesh);
            u.dofs_mut()[f] = Vector3::new(1.0, 0.0, 0.0);
            worst = worst.max(sobolev_cr_ratio(&mesh, &u));
        }
        assert!((worst - spike_sobolev_cr(&mesh)).abs() < 1e-12 * worst);
    }
}
