//! Space-time errors against a reference solution on a sub-box.

use nalgebra::Vector3;

use super::fit::{fit_power_law, PowerFit};
use crate::mesh::quadrature::{gauss_legendre, TetRule};
use crate::mesh::{BoxDomain, CellLocator, Mesh, Point};
use crate::scheme::{SchemeParams, Trajectory};
use crate::{Error, Result};

/// A reference density and velocity.
pub trait Reference: Sync {
    fn density(&self, t: f64, x: &Point) -> f64;
    fn velocity(&self, t: f64, x: &Point) -> Vector3<f64>;
}

/// The piecewise-constant-in-time interpolant of a computed trajectory,
/// usable as a reference on another (or the same) mesh.
pub struct TrajectoryReference<'a> {
    mesh: &'a Mesh,
    traj: &'a Trajectory,
    locator: CellLocator,
}

impl<'a> TrajectoryReference<'a> {
    pub fn new(mesh: &'a Mesh, traj: &'a Trajectory) -> Self {
        TrajectoryReference {
            mesh,
            traj,
            locator: CellLocator::new(mesh),
        }
    }

    fn cell(&self, x: &Point) -> usize {
        self.locator
            .locate(self.mesh, x, 1e-10)
            .unwrap_or_else(|| panic!("point {x:?} is outside the reference mesh"))
    }
}

impl Reference for TrajectoryReference<'_> {
    fn density(&self, t: f64, x: &Point) -> f64 {
        self.traj.state_at(t).rho[self.cell(x)]
    }

    fn velocity(&self, t: f64, x: &Point) -> Vector3<f64> {
        let c = self.cell(x);
        self.traj.state_at(t).u.eval(self.mesh, c, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorLevel {
    pub h: f64,
    /// `‖ρ_h - ρ*‖_{L^γ((0,T)×K)}`.
    pub density: f64,
    /// `‖u_h - u*‖_{L²((0,T)×K)}`.
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub levels: Vec<ErrorLevel>,
    /// Present with at least three levels and positive errors.
    pub density_order: Option<PowerFit>,
    pub velocity_order: Option<PowerFit>,
}

impl ErrorReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.levels
            .windows(2)
            .all(|w| w[1].density < w[0].density && w[1].velocity < w[0].velocity)
    }
}

const SPACE_DEGREE: u32 = 4;
const TIME_POINTS: usize = 3;

/// Errors of one trajectory on `(0, T) × K`, `T` the final time. Cells are
/// integrated by a degree-4 rule restricted to points inside `K`, which is
/// exact in the selection when `K` is aligned with the mesh; each step
/// interval uses 3-point Gauss in time.
pub fn error_level(
    mesh: &Mesh,
    traj: &Trajectory,
    reference: &dyn Reference,
    sub_box: &BoxDomain,
    params: &SchemeParams,
) -> Result<ErrorLevel> {
    let domain = mesh.bounding_box();
    if !sub_box.is_inside(&domain) || (0..3).any(|d| sub_box.min[d] >= sub_box.max[d]) {
        return Err(Error::Domain(format!(
            "sub-box {:?}..{:?} is not a nonempty box inside the domain {:?}..{:?}",
            sub_box.min.as_slice(),
            sub_box.max.as_slice(),
            domain.min.as_slice(),
            domain.max.as_slice()
        )));
    }
    for s in &traj.states {
        s.check_mesh(mesh).map_err(|e| Error::MeshMismatch(e.to_string()))?;
    }
    let gamma = params.gamma;
    let rule = TetRule::new(SPACE_DEGREE);
    let (tx, tw) = gauss_legendre(TIME_POINTS);

    // Cells with at least one quadrature point in K, with those points.
    let mut cells = Vec::new();
    for c in 0..mesh.num_cells() {
        let v = mesh.cell_vertices(c);
        let vol = mesh.geometry(c).volume;
        let pts: Vec<(Point, [f64; 4], f64)> = rule
            .bary
            .iter()
            .zip(&rule.weights)
            .filter_map(|(b, w)| {
                let x = v[0] * b[0] + v[1] * b[1] + v[2] * b[2] + v[3] * b[3];
                sub_box.contains(&x).then_some((x, *b, w * vol))
            })
            .collect();
        if !pts.is_empty() {
            cells.push((c, pts));
        }
    }

    let (mut rho_err, mut u_err) = (0.0, 0.0);
    for (k, w) in traj.states.windows(2).enumerate() {
        let (t0, t1) = (w[0].t, w[1].t);
        let state = &traj.states[k];
        for (x, wt) in tx.iter().zip(&tw) {
            let t = t0 + x * (t1 - t0);
            let dt = wt * (t1 - t0);
            for (c, pts) in &cells {
                for (xq, b, wq) in pts {
                    let dr = state.rho[*c] - reference.density(t, xq);
                    let du = state.u.eval_bary(mesh, *c, b) - reference.velocity(t, xq);
                    rho_err += dt * wq * dr.abs().powf(gamma);
                    u_err += dt * wq * du.norm_squared();
                }
            }
        }
    }
    Ok(ErrorLevel {
        h: mesh.h(),
        density: rho_err.powf(1.0 / gamma),
        velocity: u_err.sqrt(),
    })
}

pub fn error_vs_reference(
    levels: &[(&Mesh, &Trajectory)],
    reference: &dyn Reference,
    sub_box: &BoxDomain,
    params: &SchemeParams,
) -> Result<ErrorReport> {
    let levels = levels
        .iter()
        .map(|(m, t)| error_level(m, t, reference, sub_box, params))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let d: Vec<f64> = levels.iter().map(|l| l.density).collect();
    let v: Vec<f64> = levels.iter().map(|l| l.velocity).collect();
    Ok(ErrorReport {
        density_order: fit_power_law(&h, &d).ok(),
        velocity_order: fit_power_law(&h, &v).ok(),
        levels,
    })
}
