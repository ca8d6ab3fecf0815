//! Dissipative upwind flux.
//!
//! With `r` piecewise constant and `⟨u·n⟩` the face mean, the flux is
//! constant on each face, so one value per face is stored.

use super::eos::chi;
use super::SchemeParams;
use crate::mesh::Mesh;
use crate::spaces::{CrField, FieldValue, QField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpwindFlux<T> {
    /// `⟨u·n⟩` on the face.
    pub normal_velocity: f64,
    pub h_alpha: f64,
    /// `⟨⟨r⟩⟩ ⟨u·n⟩`.
    pub convective: T,
    /// `max{h^α, |⟨u·n⟩|} ⟦r⟧`.
    pub dissipative: T,
    /// `r^out [⟨u·n⟩]⁻ + r^in [⟨u·n⟩]⁺`.
    pub standard: T,
    /// `(h^α / 2) ⟦r⟧ χ(⟨u·n⟩ / h^α)`.
    pub cutoff: T,
}

impl<T: FieldValue> UpwindFlux<T> {
    pub fn new(r_in: T, r_out: T, normal_velocity: f64, h_alpha: f64) -> Self {
        let un = normal_velocity;
        let jump = r_out - r_in;
        UpwindFlux {
            normal_velocity: un,
            h_alpha,
            convective: (r_in + r_out) * (0.5 * un),
            dissipative: jump * h_alpha.max(un.abs()),
            standard: r_out * un.min(0.0) + r_in * un.max(0.0),
            cutoff: jump * (0.5 * h_alpha * chi(un / h_alpha)),
        }
    }

    /// `convective - dissipative / 2`.
    pub fn first_form(&self) -> T {
        self.convective - self.dissipative * 0.5
    }

    /// `standard - cutoff`, the value used by the scheme.
    pub fn value(&self) -> T {
        self.standard - self.cutoff
    }
}

/// Flux of `r` through interior face `face` driven by `u`.
pub fn upwind<T: FieldValue>(
    mesh: &Mesh,
    r: &QField<T>,
    u: &CrField,
    face: usize,
    params: &SchemeParams,
) -> Result<UpwindFlux<T>> {
    let f = mesh.face(face);
    let nb = f.neighbor.ok_or(Error::ExteriorFace(face))?;
    Ok(UpwindFlux::new(
        r[f.owner],
        r[nb],
        u.normal_flux(mesh, face),
        params.h_alpha(mesh.h()),
    ))
}

/// Partial derivatives of `Up = ⟨⟨r⟩⟩ un - ½ max(h^α, |un|) ⟦r⟧` with
/// respect to `r_in`, `r_out` (scalars) and the coefficient of `⟦r⟧`, `⟨⟨r⟩⟩`
/// in the `un` derivative. At the kinks `|un| = h^α` the one-sided
/// derivative from the inside of the band is used.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FluxDerivatives {
    pub d_in: f64,
    pub d_out: f64,
    /// `∂Up/∂un = avg_coef ⟨⟨r⟩⟩ - jump_coef ⟦r⟧`.
    pub jump_coef: f64,
}

#[inline]
pub(crate) fn flux_derivatives(un: f64, h_alpha: f64) -> FluxDerivatives {
    let m = h_alpha.max(un.abs());
    let dm = if un.abs() > h_alpha { un.signum() } else { 0.0 };
    FluxDerivatives {
        d_in: 0.5 * un + 0.5 * m,
        d_out: 0.5 * un - 0.5 * m,
        jump_coef: 0.5 * dm,
    }
}
