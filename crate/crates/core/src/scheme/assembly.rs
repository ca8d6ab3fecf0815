//! Residuals of the discrete continuity and momentum equations and their
//! Jacobian.
//!
//! Unknowns are ordered as all cell densities followed by the three velocity
//! components of every interior face, in the order of
//! [`Mesh::interior_faces`]. Exterior velocities are fixed at zero.
//!
//! Continuity residual of cell `E` (tested with the indicator of `E`):
//!
//! ```text
//! R_E = |E| (ρ_E - ρ°_E) / Δt + Σ_{Γ ⊂ ∂E interior} s_{E,Γ} |Γ| Up[ρ, u]_Γ
//! ```
//!
//! with `s_{E,Γ} = +1` if `E` owns `Γ` and `-1` otherwise. Momentum residual
//! of interior face `Γ'` (tested with the CR basis function `ψ_Γ' e_c`):
//!
//! ```text
//! R_Γ' = ¼ Σ_{E ∋ Γ'} ( |E| D_t(ρ⟨u⟩)_E + Σ_Γ s_{E,Γ} |Γ| Up[ρ⟨u⟩, u]_Γ )
//!        - |Γ'| n_Γ' (p(ρ_in) - p(ρ_out))
//!        + Σ_{E ∋ Γ'} |E| (μ ∇u_E ∇ψ + (μ/3 + η) div u_E ∇ψ)
//!        - ∫ f ψ_Γ'
//! ```

use nalgebra::Vector3;

use super::eos::pressure_and_derivative;
use super::linear::CsrMatrix;
use super::upwind::{flux_derivatives, UpwindFlux};
use super::{SchemeParams, State};
use crate::mesh::quadrature::tet_degree2;
use crate::mesh::Mesh;
use crate::spaces::{CrField, QField};
use crate::{Error, Result};

/// Switches for the individual terms of the momentum residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub time: bool,
    pub convection: bool,
    pub pressure: bool,
    pub viscous: bool,
    pub forcing: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Terms {
            time: true,
            convection: true,
            pressure: true,
            viscous: true,
            forcing: true,
        }
    }
}

impl Terms {
    pub fn viscous_only() -> Self {
        Terms {
            time: false,
            convection: false,
            pressure: false,
            viscous: true,
            forcing: false,
        }
    }
}

/// Map between mesh entities and positions in the unknown vector.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub n_cells: usize,
    pub slot: Vec<Option<usize>>,
}

impl Layout {
    pub fn new(mesh: &Mesh) -> Self {
        let mut slot = vec![None; mesh.num_faces()];
        for (k, &f) in mesh.interior_faces().iter().enumerate() {
            slot[f] = Some(k);
        }
        Layout {
            n_cells: mesh.num_cells(),
            slot,
        }
    }

    pub fn n_faces(&self) -> usize {
        self.slot.iter().filter(|s| s.is_some()).count()
    }

    pub fn len(&self) -> usize {
        self.n_cells + 3 * self.n_faces()
    }

    #[inline]
    pub fn u(&self, slot: usize, c: usize) -> usize {
        self.n_cells + 3 * slot + c
    }

    pub fn pack(&self, mesh: &Mesh, rho: &QField, u: &CrField, x: &mut [f64]) {
        x[..self.n_cells].copy_from_slice(rho.values());
        for (k, &f) in mesh.interior_faces().iter().enumerate() {
            let d = u.dofs()[f];
            x[self.u(k, 0)..self.u(k, 0) + 3].copy_from_slice(d.as_slice());
        }
    }

    pub fn unpack(&self, mesh: &Mesh, x: &[f64], rho: &mut QField, u: &mut CrField) {
        rho.values_mut().copy_from_slice(&x[..self.n_cells]);
        let dofs = u.dofs_mut();
        for (k, &f) in mesh.interior_faces().iter().enumerate() {
            let i = self.u(k, 0);
            dofs[f] = Vector3::new(x[i], x[i + 1], x[i + 2]);
        }
    }
}

/// Receiver of Jacobian entries.
pub(crate) trait Sink {
    fn add(&mut self, r: usize, c: usize, v: f64);
}

struct PatternSink {
    rows: Vec<Vec<usize>>,
}

impl Sink for PatternSink {
    #[inline]
    fn add(&mut self, r: usize, c: usize, _v: f64) {
        self.rows[r].push(c);
    }
}

impl Sink for CsrMatrix {
    #[inline]
    fn add(&mut self, r: usize, c: usize, v: f64) {
        CsrMatrix::add(self, r, c, v);
    }
}

/// Which derivatives [`Discretization::jacobian`] produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum JacobianMode {
    Full,
    /// Transport velocity of the momentum flux frozen: derivatives of
    /// `Up[ρ⟨u⟩, u]` through `⟨u·n⟩` are dropped.
    Frozen,
}

/// One implicit step's worth of fixed data: mesh, parameters, old state,
/// time step and the forcing load.
pub(crate) struct Discretization<'a> {
    pub mesh: &'a Mesh,
    pub params: &'a SchemeParams,
    pub layout: Layout,
    pub terms: Terms,
    pub h_alpha: f64,
    pub dt: f64,
    rho_old: &'a QField,
    momentum_old: Vec<Vector3<f64>>,
    load: Vec<Vector3<f64>>,
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a Mesh, params: &'a SchemeParams, old: &'a State, dt: f64, terms: Terms) -> Result<Self> {
        old.rho.check_mesh(mesh)?;
        old.u.check_mesh(mesh)?;
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let layout = Layout::new(mesh);
        let momentum_old = (0..mesh.num_cells())
            .map(|c| old.u.cell_average(mesh, c) * old.rho[c])
            .collect();
        let mut disc = Discretization {
            mesh,
            params,
            h_alpha: params.h_alpha(mesh.h()),
            dt,
            rho_old: &old.rho,
            momentum_old,
            load: vec![Vector3::zeros(); mesh.interior_faces().len()],
            layout,
            terms,
        };
        if terms.forcing {
            if let Some(f) = &params.forcing {
                disc.load = forcing_load(mesh, &disc.layout, f.as_ref(), old.t + dt);
            }
        }
        Ok(disc)
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    /// Continuity and momentum residuals, packed like the unknowns.
    pub fn residual(&self, rho: &QField, u: &CrField, out: &mut [f64]) {
        let mesh = self.mesh;
        let lay = &self.layout;
        let nc = lay.n_cells;
        out.iter_mut().for_each(|v| *v = 0.0);
        let (a, gamma) = (self.params.a, self.params.gamma);

        let avg: Vec<Vector3<f64>> = (0..nc).map(|c| u.cell_average(mesh, c)).collect();
        let mom: Vec<Vector3<f64>> = (0..nc).map(|c| avg[c] * rho[c]).collect();
        let mut cell_flux = vec![Vector3::zeros(); nc];

        for &f in mesh.interior_faces() {
            let face = mesh.face(f);
            let (o, b) = (face.owner, face.neighbor.unwrap());
            let un = u.dofs()[f].dot(&face.normal);
            let fr = UpwindFlux::new(rho[o], rho[b], un, self.h_alpha).value();
            out[o] += face.area * fr;
            out[b] -= face.area * fr;
            if self.terms.convection {
                let fm = UpwindFlux::new(mom[o], mom[b], un, self.h_alpha).value();
                cell_flux[o] += fm * face.area;
                cell_flux[b] -= fm * face.area;
            }
        }

        for c in 0..nc {
            let g = mesh.geometry(c);
            out[c] += g.volume * (rho[c] - self.rho_old[c]) / self.dt;
            let mut q = cell_flux[c];
            if self.terms.time {
                q += (mom[c] - self.momentum_old[c]) * (g.volume / self.dt);
            }
            let grad = u.gradient(mesh, c);
            let div = grad.trace();
            let lam = self.params.mu / 3.0 + self.params.eta;
            for i in 0..4 {
                let Some(s) = lay.slot[g.faces[i]] else { continue };
                let mut r = q * 0.25;
                if self.terms.viscous {
                    let gi = g.basis_gradients[i];
                    r += (grad * gi * self.params.mu + gi * (lam * div)) * g.volume;
                }
                let k = lay.u(s, 0);
                out[k] += r.x;
                out[k + 1] += r.y;
                out[k + 2] += r.z;
            }
        }

        for (s, &f) in mesh.interior_faces().iter().enumerate() {
            let face = mesh.face(f);
            let k = lay.u(s, 0);
            let mut r = -self.load[s];
            if self.terms.pressure {
                let (po, _) = pressure_and_derivative(rho[face.owner], a, gamma);
                let (pb, _) = pressure_and_derivative(rho[face.neighbor.unwrap()], a, gamma);
                r -= face.normal * (face.area * (po - pb));
            }
            out[k] += r.x;
            out[k + 1] += r.y;
            out[k + 2] += r.z;
        }
    }

    pub fn pattern(&self) -> CsrMatrix {
        let n = self.len();
        let mut sink = PatternSink {
            rows: vec![Vec::new(); n],
        };
        let rho = QField::constant(self.mesh, 1.0);
        let u = CrField::zeros(self.mesh);
        self.jacobian_into(&rho, &u, JacobianMode::Full, &mut sink);
        CsrMatrix::from_rows(sink.rows)
    }

    pub fn jacobian(&self, rho: &QField, u: &CrField, mode: JacobianMode, jac: &mut CsrMatrix) {
        jac.clear();
        self.jacobian_into(rho, u, mode, jac);
    }

    fn jacobian_into<S: Sink>(&self, rho: &QField, u: &CrField, mode: JacobianMode, sink: &mut S) {
        let mesh = self.mesh;
        let lay = &self.layout;
        let nc = lay.n_cells;
        let full = mode == JacobianMode::Full;
        let (a, gamma) = (self.params.a, self.params.gamma);
        let avg: Vec<Vector3<f64>> = (0..nc).map(|c| u.cell_average(mesh, c)).collect();
        let mom: Vec<Vector3<f64>> = (0..nc).map(|c| avg[c] * rho[c]).collect();

        // Continuity.
        for &f in mesh.interior_faces() {
            let face = mesh.face(f);
            let (o, b) = (face.owner, face.neighbor.unwrap());
            let un = u.dofs()[f].dot(&face.normal);
            let d = flux_derivatives(un, self.h_alpha);
            let area = face.area;
            sink.add(o, o, area * d.d_in);
            sink.add(o, b, area * d.d_out);
            sink.add(b, o, -area * d.d_in);
            sink.add(b, b, -area * d.d_out);
            let dun = 0.5 * (rho[o] + rho[b]) - d.jump_coef * (rho[b] - rho[o]);
            let s = lay.slot[f].unwrap();
            for c in 0..3 {
                let v = area * dun * face.normal[c];
                sink.add(o, lay.u(s, c), v);
                sink.add(b, lay.u(s, c), -v);
            }
        }
        for c in 0..nc {
            sink.add(c, c, mesh.geometry(c).volume / self.dt);
        }

        // Momentum: time derivative and convective flux, distributed with
        // weight 1/4 from each cell to its interior faces.
        let mut entries: [Vec<(usize, f64)>; 3] = Default::default();
        for e in 0..nc {
            let g = mesh.geometry(e);
            if !g.faces.iter().any(|&f| lay.slot[f].is_some()) {
                continue;
            }
            for list in entries.iter_mut() {
                list.clear();
            }
            if self.terms.time {
                let w = g.volume / self.dt;
                self.push_momentum_derivatives(e, rho, &avg, w, &mut entries);
            }
            if self.terms.convection {
                for (i, &f) in g.faces.iter().enumerate() {
                    let Some(s) = lay.slot[f] else { continue };
                    let face = mesh.face(f);
                    let (o, b) = (face.owner, face.neighbor.unwrap());
                    let sign = g.orientation[i] * face.area;
                    let un = u.dofs()[f].dot(&face.normal);
                    let d = flux_derivatives(un, self.h_alpha);
                    self.push_momentum_derivatives(o, rho, &avg, sign * d.d_in, &mut entries);
                    self.push_momentum_derivatives(b, rho, &avg, sign * d.d_out, &mut entries);
                    for (comp, list) in entries.iter_mut().enumerate() {
                        let dun = 0.5 * (mom[o][comp] + mom[b][comp]) - d.jump_coef * (mom[b][comp] - mom[o][comp]);
                        for c2 in 0..3 {
                            let v = if full { sign * dun * face.normal[c2] } else { 0.0 };
                            list.push((lay.u(s, c2), v));
                        }
                    }
                }
            }
            for &f in &g.faces {
                let Some(s) = lay.slot[f] else { continue };
                for (comp, list) in entries.iter().enumerate() {
                    let row = lay.u(s, comp);
                    for &(col, v) in list {
                        sink.add(row, col, 0.25 * v);
                    }
                }
            }
        }

        // Pressure.
        if self.terms.pressure {
            for (s, &f) in mesh.interior_faces().iter().enumerate() {
                let face = mesh.face(f);
                let (o, b) = (face.owner, face.neighbor.unwrap());
                let (_, dpo) = pressure_and_derivative(rho[o], a, gamma);
                let (_, dpb) = pressure_and_derivative(rho[b], a, gamma);
                for c in 0..3 {
                    let w = face.area * face.normal[c];
                    sink.add(lay.u(s, c), o, -w * dpo);
                    sink.add(lay.u(s, c), b, w * dpb);
                }
            }
        }

        // Viscous terms.
        if self.terms.viscous {
            let mu = self.params.mu;
            let lam = mu / 3.0 + self.params.eta;
            for e in 0..nc {
                let g = mesh.geometry(e);
                for i in 0..4 {
                    let Some(si) = lay.slot[g.faces[i]] else { continue };
                    let gi = g.basis_gradients[i];
                    for k in 0..4 {
                        let Some(sk) = lay.slot[g.faces[k]] else { continue };
                        let gk = g.basis_gradients[k];
                        let dot = gi.dot(&gk);
                        for c in 0..3 {
                            for c2 in 0..3 {
                                let delta = if c == c2 { mu * dot } else { 0.0 };
                                let v = g.volume * (delta + lam * gk[c2] * gi[c]);
                                sink.add(lay.u(si, c), lay.u(sk, c2), v);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Appends `w ∂(ρ_K ⟨u⟩_K)_c` for every component `c`.
    fn push_momentum_derivatives(
        &self,
        k: usize,
        rho: &QField,
        avg: &[Vector3<f64>],
        w: f64,
        entries: &mut [Vec<(usize, f64)>; 3],
    ) {
        let g = self.mesh.geometry(k);
        for (comp, list) in entries.iter_mut().enumerate() {
            list.push((k, w * avg[k][comp]));
            for &f in &g.faces {
                if let Some(s) = self.layout.slot[f] {
                    list.push((self.layout.u(s, comp), 0.25 * w * rho[k]));
                }
            }
        }
    }

    /// Scaled max-norms of the continuity and momentum parts of `r`:
    /// `|R_E| Δt / |E|` and `|R_Γ| Δt / m_Γ`, `m_Γ = (|E₁| + |E₂|) / 4`.
    pub fn scaled_norms(&self, r: &[f64]) -> (f64, f64) {
        let mesh = self.mesh;
        let mut c_norm: f64 = 0.0;
        for c in 0..self.layout.n_cells {
            c_norm = c_norm.max(r[c].abs() * self.dt / mesh.geometry(c).volume);
        }
        let mut m_norm: f64 = 0.0;
        for (s, &f) in mesh.interior_faces().iter().enumerate() {
            let face = mesh.face(f);
            let m = 0.25 * (mesh.geometry(face.owner).volume + mesh.geometry(face.neighbor.unwrap()).volume);
            let k = self.layout.u(s, 0);
            for v in &r[k..k + 3] {
                m_norm = m_norm.max(v.abs() * self.dt / m);
            }
        }
        (c_norm, m_norm)
    }
}

/// `∫ f(t, ·) ψ_Γ` for every interior face, with the degree-2 cell rule.
pub(crate) fn forcing_load(mesh: &Mesh, layout: &Layout, f: &dyn super::Forcing, t: f64) -> Vec<Vector3<f64>> {
    let rule = tet_degree2();
    let mut load = vec![Vector3::zeros(); mesh.interior_faces().len()];
    for c in 0..mesh.num_cells() {
        let g = mesh.geometry(c);
        let v = mesh.cell_vertices(c);
        for (b, w) in rule.bary.iter().zip(&rule.weights) {
            let x = v[0] * b[0] + v[1] * b[1] + v[2] * b[2] + v[3] * b[3];
            let fx = f.momentum_source(t, &x) * (w * g.volume);
            // b[j] is the barycentric coordinate of local vertex j, opposite
            // local face j.
            for i in 0..4 {
                if let Some(s) = layout.slot[g.faces[i]] {
                    load[s] += fx * (1.0 - 3.0 * b[i]);
                }
            }
        }
    }
    load
}

/// Continuity residual per cell of `new` relative to `old`.
pub fn assemble_continuity_residual(mesh: &Mesh, new: &State, old: &State, params: &SchemeParams) -> Result<Vec<f64>> {
    let disc = step_discretization(mesh, new, old, params, Terms::default())?;
    let mut r = vec![0.0; disc.len()];
    disc.residual(&new.rho, &new.u, &mut r);
    r.truncate(mesh.num_cells());
    Ok(r)
}

/// Momentum residual per interior face (ordered as `mesh.interior_faces()`).
pub fn assemble_momentum_residual(
    mesh: &Mesh,
    new: &State,
    old: &State,
    params: &SchemeParams,
    terms: Terms,
) -> Result<Vec<Vector3<f64>>> {
    let disc = step_discretization(mesh, new, old, params, terms)?;
    let mut r = vec![0.0; disc.len()];
    disc.residual(&new.rho, &new.u, &mut r);
    let nc = mesh.num_cells();
    Ok(r[nc..].chunks(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect())
}

fn step_discretization<'a>(
    mesh: &'a Mesh,
    new: &State,
    old: &'a State,
    params: &'a SchemeParams,
    terms: Terms,
) -> Result<Discretization<'a>> {
    new.rho.check_mesh(mesh)?;
    new.u.check_mesh(mesh)?;
    let dt = new.t - old.t;
    Discretization::new(mesh, params, old, dt, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, BoxDomain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(mesh: &Mesh, rng: &mut ChaCha8Rng, t: f64, scale: f64) -> State {
        let rho = QField::from_values((0..mesh.num_cells()).map(|_| rng.gen_range(0.5..2.0)).collect());
        let mut u = CrField::from_dofs(
            (0..mesh.num_faces())
                .map(|_| {
                    Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
                })
                .collect(),
        );
        u.zero_boundary(mesh);
        State { rho, u, t, k: 0 }
    }

    #[test]
    fn stationary_state_has_zero_residual() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let params = SchemeParams::default();
        let old = State::constant(&mesh, 1.3);
        let mut new = old.clone();
        new.t = 0.1;
        let rc = assemble_continuity_residual(&mesh, &new, &old, &params).unwrap();
        assert!(rc.iter().all(|v| v.abs() < 1e-15));
        let rm = assemble_momentum_residual(&mesh, &new, &old, &params, Terms::default()).unwrap();
        assert!(rm.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn flux_terms_telescope() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let params = SchemeParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let old = random_state(&mesh, &mut rng, 0.0, 1.0);
        let mut new = random_state(&mesh, &mut rng, 0.1, 1.0);
        new.rho = old.rho.clone();
        let rc = assemble_continuity_residual(&mesh, &new, &old, &params).unwrap();
        assert!(rc.iter().sum::<f64>().abs() < 1e-13);
    }

    #[test]
    fn two_cell_continuity_by_hand() {
        // On the 6-tet cube pick one interior face, set densities 1 and 3 on
        // its cells, and a velocity only on that face.
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let params = SchemeParams::default();
        let f = mesh.interior_faces()[0];
        let face = mesh.face(f).clone();
        let (o, b) = (face.owner, face.neighbor.unwrap());
        let mut old = State::constant(&mesh, 1.0);
        old.rho[b] = 3.0;
        let mut new = old.clone();
        new.t = 0.25;
        new.u.dofs_mut()[f] = face.normal * 0.2;
        let r = assemble_continuity_residual(&mesh, &new, &old, &params).unwrap();
        let ha = mesh.h().powf(params.alpha);
        // un = 0.2 < h^α: upwind from the owner plus the cutoff term.
        let chi = 1.0 - 0.2 / ha;
        let flux = 1.0 * 0.2 - 0.5 * ha * (3.0 - 1.0) * chi;
        // Other faces of o and b carry only the density jump dissipation.
        let mut expect_o = face.area * flux;
        let mut expect_b = -face.area * flux;
        for (cell, expect) in [(o, &mut expect_o), (b, &mut expect_b)] {
            let g = mesh.geometry(cell);
            for (i, &g_f) in g.faces.iter().enumerate() {
                if g_f == f || !mesh.face(g_f).is_interior() {
                    continue;
                }
                let other = mesh.neighbor_across(cell, i).unwrap();
                let (r_in, r_out) = if g.orientation[i] > 0.0 {
                    (old.rho[cell], old.rho[other])
                } else {
                    (old.rho[other], old.rho[cell])
                };
                *expect += g.orientation[i] * mesh.face(g_f).area * (-0.5 * ha * (r_out - r_in));
            }
        }
        assert!((r[o] - expect_o).abs() < 1e-14);
        assert!((r[b] - expect_b).abs() < 1e-14);
    }

    #[test]
    fn viscous_residual_matches_bilinear_form() {
        // Oracle: μ ∫ ∇u : ∇ψ + (μ/3+η) ∫ div u div ψ by quadrature of the
        // broken gradients of u and of each basis function.
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let params = SchemeParams {
            eta: 0.3,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let old = random_state(&mesh, &mut rng, 0.0, 1.0);
        let mut new = random_state(&mesh, &mut rng, 0.2, 1.0);
        new.rho = QField::constant(&mesh, 1.0);
        let rm = assemble_momentum_residual(&mesh, &new, &old, &params, Terms::viscous_only()).unwrap();
        let lam = params.mu / 3.0 + params.eta;
        let grads = new.u.broken_grad(&mesh);
        let divs = new.u.broken_div(&mesh);
        for (s, &f) in mesh.interior_faces().iter().enumerate() {
            for c in 0..3 {
                let mut basis = CrField::zeros(&mesh);
                basis.dofs_mut()[f][c] = 1.0;
                let gb = basis.broken_grad(&mesh);
                let db = basis.broken_div(&mesh);
                let mut expect = 0.0;
                for e in 0..mesh.num_cells() {
                    let vol = mesh.geometry(e).volume;
                    expect += vol * (params.mu * grads[e].dot(&gb[e]) + lam * divs[e] * db[e]);
                }
                assert!((rm[s][c] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let params = SchemeParams {
            eta: 0.2,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let old = random_state(&mesh, &mut rng, 0.0, 0.5);
        let new = random_state(&mesh, &mut rng, 0.1, 0.5);
        let disc = Discretization::new(&mesh, &params, &old, 0.1, Terms::default()).unwrap();
        let mut jac = disc.pattern();
        disc.jacobian(&new.rho, &new.u, JacobianMode::Full, &mut jac);
        let n = disc.len();
        let mut x = vec![0.0; n];
        disc.layout.pack(&mesh, &new.rho, &new.u, &mut x);
        let eval = |x: &[f64]| {
            let mut rho = new.rho.clone();
            let mut u = new.u.clone();
            disc.layout.unpack(&mesh, x, &mut rho, &mut u);
            let mut r = vec![0.0; n];
            disc.residual(&rho, &u, &mut r);
            r
        };
        let eps = 1e-6;
        let mut worst: f64 = 0.0;
        for j in (0..n).step_by(7) {
            let mut xp = x.clone();
            xp[j] += eps;
            let mut xm = x.clone();
            xm[j] -= eps;
            let (rp, rm) = (eval(&xp), eval(&xm));
            for i in 0..n {
                let fd = (rp[i] - rm[i]) / (2.0 * eps);
                worst = worst.max((fd - jac.get(i, j)).abs());
            }
        }
        assert!(worst < 1e-6, "max Jacobian error {worst}");
    }
}
