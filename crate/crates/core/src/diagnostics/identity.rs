//! Both sides of the upwind summation-by-parts formula
//!
//! ```text
//! ∫ r u·∇φ = Σ_Γ |Γ| Up[r,u] ⟦F⟧ + (h^α/2) Σ_Γ |Γ| ⟦r⟧ ⟦F⟧ χ(⟨u·n⟩/h^α)
//!          + Σ_E Σ_{Γ⊂∂E} ∫_Γ (F - φ) ⟦r⟧ [⟨u·n⟩]⁻
//!          + Σ_E Σ_{Γ⊂∂E} ∫_Γ φ r (u·n - ⟨u·n⟩) + ∫ r (F - φ) div_h u
//! ```
//!
//! In the cell sums `n` is the outward normal of `E`, `⟦r⟧ = r_neighbor - r_E`
//! and the jump vanishes on the boundary.

use nalgebra::Vector3;

use crate::mesh::quadrature::{cell_points, face_points, TetRule, TriangleRule};
use crate::mesh::{Mesh, Point};
use crate::scheme::{chi, SchemeParams, UpwindFlux};
use crate::spaces::{CrField, QField};

/// The two sides of the identity and the individual right-hand terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityTerms {
    pub volume: f64,
    pub upwind: f64,
    pub cutoff: f64,
    pub upwind_correction: f64,
    pub normal_fluctuation: f64,
    pub divergence: f64,
}

impl IdentityTerms {
    pub fn right_side(&self) -> f64 {
        self.upwind + self.cutoff + self.upwind_correction + self.normal_fluctuation + self.divergence
    }

    pub fn residual(&self) -> f64 {
        self.volume - self.right_side()
    }
}

/// `phi` returns the test function and its gradient. Integrals use rules of
/// the given degree (at least 2).
pub fn upwind_identity_terms(
    mesh: &Mesh,
    r: &QField,
    f: &QField,
    u: &CrField,
    phi: &dyn Fn(&Point) -> (f64, Vector3<f64>),
    params: &SchemeParams,
    degree: u32,
) -> IdentityTerms {
    let degree = degree.max(2);
    let ha = params.h_alpha(mesh.h());
    let tet = TetRule::new(degree);
    let tri = TriangleRule::new(degree);
    let mut t = IdentityTerms {
        volume: 0.0,
        upwind: 0.0,
        cutoff: 0.0,
        upwind_correction: 0.0,
        normal_fluctuation: 0.0,
        divergence: 0.0,
    };

    for &fi in mesh.interior_faces() {
        let face = mesh.face(fi);
        let (i, o) = (face.owner, face.neighbor.unwrap());
        let un = u.normal_flux(mesh, fi);
        let up = UpwindFlux::new(r[i], r[o], un, ha).first_form();
        let jf = f[o] - f[i];
        t.upwind += face.area * up * jf;
        t.cutoff += 0.5 * ha * face.area * (r[o] - r[i]) * jf * chi(un / ha);
    }

    for c in 0..mesh.num_cells() {
        let g = mesh.geometry(c);
        let div = u.divergence(mesh, c);
        for (x, w) in cell_points(mesh, c, &tet) {
            let (p, dp) = phi(&x);
            t.volume += w * r[c] * u.eval(mesh, c, &x).dot(&dp);
            t.divergence += w * r[c] * (f[c] - p) * div;
        }
        for i in 0..4 {
            let fi = g.faces[i];
            let face = mesh.face(fi);
            let n = face.normal * g.orientation[i];
            let un_mean = u.normal_flux(mesh, fi) * g.orientation[i];
            let jr = mesh.neighbor_across(c, i).map_or(0.0, |nb| r[nb] - r[c]);
            for (x, w) in face_points(mesh, fi, &tri) {
                let (p, _) = phi(&x);
                t.upwind_correction += w * (f[c] - p) * jr * un_mean.min(0.0);
                t.normal_fluctuation += w * p * r[c] * (u.eval(mesh, c, &x).dot(&n) - un_mean);
            }
        }
    }
    t
}

/// Left side minus right side of the identity.
pub fn upwind_identity_check(
    mesh: &Mesh,
    r: &QField,
    f: &QField,
    u: &CrField,
    phi: &dyn Fn(&Point) -> (f64, Vector3<f64>),
    params: &SchemeParams,
) -> f64 {
    upwind_identity_terms(mesh, r, f, u, phi, params, 2).residual()
}
