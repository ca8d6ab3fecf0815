//! Per-step mass and energy ledger.
//!
//! All entries that come from a rate (viscous term, numerical dissipation,
//! forcing work) are multiplied by `Δt`, so every column is an energy and
//! the slack is
//!
//! ```text
//! slack = E(k) - E(k-1) + viscous + Σ num_dissipation - forcing_work
//! ```
//!
//! which is nonpositive for an exact solution of the step equations. The
//! `P''` terms use their `γ/2`-power lower bounds; the remaining terms are
//! the exact right-hand sides of the energy balance.

use nalgebra::Vector3;

use crate::mesh::Mesh;
use crate::scheme::{chi, forcing_load, Layout, SchemeParams, State};
use crate::{Error, Result};

pub const NUM_DISSIPATION_NAMES: [&str; 5] = [
    "time_density",
    "time_velocity",
    "cutoff_density_jump",
    "flux_density_jump",
    "velocity_jump",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub k: usize,
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    /// Relative change of the mass; from the initial state when produced
    /// by a run, from the previous state otherwise.
    pub mass_drift: f64,
    pub energy: f64,
    pub viscous_dissipation: f64,
    /// Nonnegative magnitudes, in the order of [`NUM_DISSIPATION_NAMES`].
    pub num_dissipation: [f64; 5],
    pub forcing_work: f64,
    pub slack: f64,
    pub newton_iterations: usize,
    pub residual: f64,
}

impl StepReport {
    pub fn total_dissipation(&self) -> f64 {
        self.viscous_dissipation + self.num_dissipation.iter().sum::<f64>()
    }
}

/// Ledger of the step `old -> new` with `Δt = t_new - t_old`.
pub fn step_ledger(mesh: &Mesh, old: &State, new: &State, params: &SchemeParams) -> Result<StepReport> {
    step_ledger_dt(mesh, old, new, new.t - old.t, params)
}

pub(crate) fn step_ledger_dt(
    mesh: &Mesh,
    old: &State,
    new: &State,
    dt: f64,
    params: &SchemeParams,
) -> Result<StepReport> {
    old.check_mesh(mesh).map_err(|e| Error::MeshMismatch(format!("old state: {e}")))?;
    new.check_mesh(mesh).map_err(|e| Error::MeshMismatch(format!("new state: {e}")))?;
    let (a, gamma) = (params.a, params.gamma);
    let ha = params.h_alpha(mesh.h());
    let lam = params.mu / 3.0 + params.eta;
    let half = 0.5 * gamma;

    let avg_new: Vec<Vector3<f64>> = (0..mesh.num_cells()).map(|c| new.u.cell_average(mesh, c)).collect();
    let mut viscous = 0.0;
    let mut d = [0.0; 5];
    for (c, g) in mesh.cell_geometries().iter().enumerate() {
        let grad = new.u.gradient(mesh, c);
        viscous += g.volume * (params.mu * grad.norm_squared() + lam * grad.trace().powi(2));
        let s = new.rho[c].powf(half) - old.rho[c].powf(half);
        d[0] += g.volume * s * s;
        d[1] += g.volume * old.rho[c] * (avg_new[c] - old.u.cell_average(mesh, c)).norm_squared();
    }
    d[0] *= 0.5 * a * gamma;
    d[1] *= 0.5;

    for &f in mesh.interior_faces() {
        let face = mesh.face(f);
        let (i, o) = (face.owner, face.neighbor.unwrap());
        let un = new.u.normal_flux(mesh, f);
        let x = chi(un / ha);
        let jr = new.rho[o].powf(half) - new.rho[i].powf(half);
        let ju = (avg_new[o] - avg_new[i]).norm_squared();
        d[2] += face.area * jr * jr * x;
        d[3] += face.area * jr * jr * un.abs();
        d[4] += face.area
            * (ha * 0.5 * (new.rho[i] + new.rho[o]) * ju * x
                + (new.rho[i] * un.max(0.0) - new.rho[o] * un.min(0.0)) * ju);
    }
    d[2] *= dt * 0.5 * a * gamma * ha;
    d[3] *= dt * 0.5 * a * gamma;
    d[4] *= dt * 0.5;

    let forcing_work = match &params.forcing {
        Some(f) if dt > 0.0 => {
            let layout = Layout::new(mesh);
            let load = forcing_load(mesh, &layout, f.as_ref(), new.t);
            dt * mesh
                .interior_faces()
                .iter()
                .zip(&load)
                .map(|(&face, l)| l.dot(&new.u.dofs()[face]))
                .sum::<f64>()
        }
        _ => 0.0,
    };

    let energy = new.energy(mesh, params);
    let viscous_dissipation = dt * viscous;
    let mass = new.mass(mesh);
    let old_mass = old.mass(mesh);
    Ok(StepReport {
        k: new.k,
        t: new.t,
        dt,
        mass,
        mass_drift: (mass - old_mass) / old_mass,
        energy,
        viscous_dissipation,
        num_dissipation: d,
        forcing_work,
        slack: energy - old.energy(mesh, params) + viscous_dissipation + d.iter().sum::<f64>() - forcing_work,
        newton_iterations: 0,
        residual: 0.0,
    })
}
