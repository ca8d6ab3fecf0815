//! Implicit time stepping: damped Newton with a positivity line search and a
//! Picard fallback.
//!
//! The initial guess of every step is the previous state, so the solution
//! branch selected is the one Newton reaches from there; nothing in the
//! solve is randomized.

use std::fmt;

use super::assembly::{Discretization, JacobianMode, Terms};
use super::linear::{CsrMatrix, LinearSolver};
use super::params::DtRule;
use super::{SchemeParams, State, Trajectory};
use crate::diagnostics::{step_ledger_dt, StepReport};
use crate::mesh::Mesh;
use crate::spaces::{CrField, QField};

use crate::{Error, Result};

/// Failed line searches tolerated before switching to Picard iterations.
const NEWTON_FAILURES: usize = 3;
const LINE_SEARCH_HALVINGS: usize = 30;

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error("nonlinear solve did not converge in {iterations} iterations (best scaled residual {best_residual:e})")]
    Divergence {
        iterations: usize,
        best_residual: f64,
        history: Vec<f64>,
        best: State,
    },
    #[error("line search could not keep the density above {floor:e}")]
    Positivity { floor: f64, history: Vec<f64>, best: State },
    #[error("linear solve failed: {0}")]
    Linear(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Scaled residual before each iteration and after the last.
    pub history: Vec<f64>,
    pub used_picard: bool,
}

/// Reusable per-mesh solver state: Jacobian pattern and linear solvers.
pub struct Stepper<'a> {
    mesh: &'a Mesh,
    params: &'a SchemeParams,
    jac: CsrMatrix,
    solver: LinearSolver,
    /// Positivity floor for Newton iterates.
    floor: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(mesh: &'a Mesh, params: &'a SchemeParams, initial: &State) -> Result<Self> {
        params.validate()?;
        initial.check_mesh(mesh)?;
        let disc = Discretization::new(mesh, params, initial, 1.0, Terms::default())?;
        let jac = disc.pattern();
        Ok(Stepper {
            mesh,
            params,
            jac,
            solver: linear_solver(params),
            floor: 1e-12 * initial.rho.min(),
        })
    }

    /// Time step for the next step from `state` under the configured rule.
    pub fn next_dt(&self, state: &State) -> Result<f64> {
        match self.params.dt_rule {
            DtRule::Fixed => Ok(self.params.fixed_dt(self.mesh.h())),
            DtRule::Cfl(_) => adapt_dt(self.mesh, state, self.params),
        }
    }

    /// Advances `old` by `dt`.
    pub fn step(&mut self, old: &State, dt: f64) -> Result<(State, StepReport)> {
        let (new, stats) = self.solve(old, dt)?;
        let mut report = step_ledger_dt(self.mesh, old, &new, dt, self.params)?;
        report.newton_iterations = stats.iterations;
        report.residual = *stats.history.last().unwrap();
        Ok((new, report))
    }

    pub fn solve(&mut self, old: &State, dt: f64) -> Result<(State, SolveStats)> {
        let mesh = self.mesh;
        let params = self.params;
        let disc = Discretization::new(mesh, params, old, dt, Terms::default())?;
        let lay = &disc.layout;
        let n = disc.len();
        let nc = lay.n_cells;
        let tol = params.tol_nonlinear;

        let mut rho = old.rho.clone();
        let mut u = old.u.clone();
        let mut x = vec![0.0; n];
        lay.pack(mesh, &rho, &u, &mut x);
        let mut r = vec![0.0; n];
        disc.residual(&rho, &u, &mut r);
        let mut norm = max_norm(&disc, &r);
        let mut history = vec![norm];
        let mut best = (norm, x.clone());
        let mut failures = 0;
        let mut used_picard = false;
        let mut iterations = 0;
        let make_state = |x: &[f64]| {
            let mut rho = old.rho.clone();
            let mut u = old.u.clone();
            lay.unpack(mesh, x, &mut rho, &mut u);
            State::new(rho, u, old.t + dt, old.k + 1)
        };

        while norm > tol && iterations < params.max_iterations {
            iterations += 1;
            if failures < NEWTON_FAILURES {
                disc.jacobian(&rho, &u, JacobianMode::Full, &mut self.jac);
                let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
                self.solver
                    .solve(&self.jac, &mut delta)
                    .map_err(|e| StepError::Linear(e.to_string()))?;
                let mut lambda = 1.0;
                let mut accepted = None;
                let mut fallback: Option<(f64, Vec<f64>, Vec<f64>)> = None;
                for _ in 0..LINE_SEARCH_HALVINGS {
                    let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + lambda * b).collect();
                    if !positive(&trial[..nc], self.floor) || trial.iter().any(|v| !v.is_finite()) {
                        lambda *= 0.5;
                        continue;
                    }
                    lay.unpack(mesh, &trial, &mut rho, &mut u);
                    let mut rt = vec![0.0; n];
                    disc.residual(&rho, &u, &mut rt);
                    let nt = max_norm(&disc, &rt);
                    if nt <= (1.0 - 1e-4 * lambda) * norm {
                        accepted = Some((nt, trial, rt));
                        break;
                    }
                    if fallback.as_ref().is_none_or(|f| nt < f.0) {
                        fallback = Some((nt, trial, rt));
                    }
                    lambda *= 0.5;
                }
                let (nt, trial, rt) = match accepted {
                    Some(a) => a,
                    None => {
                        failures += 1;
                        match fallback {
                            Some(f) => f,
                            None => {
                                return Err(StepError::Positivity {
                                    floor: self.floor,
                                    history,
                                    best: make_state(&best.1),
                                }
                                .into())
                            }
                        }
                    }
                };
                x = trial;
                r = rt;
                norm = nt;
            } else {
                used_picard = true;
                self.picard_iteration(&disc, &mut x, &mut r)?;
                norm = max_norm(&disc, &r);
            }
            lay.unpack(mesh, &x, &mut rho, &mut u);
            history.push(norm);
            if norm < best.0 {
                best = (norm, x.clone());
            }
            if !norm.is_finite() {
                break;
            }
        }

        if norm <= tol {
            Ok((
                make_state(&x),
                SolveStats {
                    iterations,
                    history,
                    used_picard,
                },
            ))
        } else {
            Err(StepError::Divergence {
                iterations,
                best_residual: best.0,
                history,
                best: make_state(&best.1),
            }
            .into())
        }
    }

    /// One step of the frozen-transport linearization: derivatives through
    /// `⟨u·n⟩` are dropped, the step is only damped to keep the density
    /// positive.
    fn picard_iteration(&mut self, disc: &Discretization<'_>, x: &mut [f64], r: &mut [f64]) -> Result<()> {
        let mesh = self.mesh;
        let lay = &disc.layout;
        let nc = lay.n_cells;
        let mut rho = QField::zeros(mesh);
        let mut u = CrField::zeros(mesh);
        lay.unpack(mesh, x, &mut rho, &mut u);
        disc.jacobian(&rho, &u, JacobianMode::Frozen, &mut self.jac);
        let mut d: Vec<f64> = r.iter().map(|v| -v).collect();
        self.solver
            .solve(&self.jac, &mut d)
            .map_err(|e| StepError::Linear(e.to_string()))?;
        let mut lambda = 1.0;
        while !positive_update(&x[..nc], &d[..nc], lambda, self.floor) {
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(StepError::Positivity {
                    floor: self.floor,
                    history: vec![],
                    best: State::new(rho, u, 0.0, 0),
                }
                .into());
            }
        }
        x.iter_mut().zip(&d).for_each(|(a, b)| *a += lambda * b);
        lay.unpack(mesh, x, &mut rho, &mut u);
        disc.residual(&rho, &u, r);
        Ok(())
    }
}

fn linear_solver(params: &SchemeParams) -> LinearSolver {
    LinearSolver::new(
        params.linear_solver,
        params.direct_threshold,
        params.gmres_tol,
        params.gmres_restart,
    )
}

fn max_norm(disc: &Discretization<'_>, r: &[f64]) -> f64 {
    let (c, m) = disc.scaled_norms(r);
    if c.is_nan() || m.is_nan() {
        f64::INFINITY
    } else {
        c.max(m)
    }
}

fn positive(rho: &[f64], floor: f64) -> bool {
    rho.iter().all(|&v| v >= floor)
}

fn positive_update(rho: &[f64], d: &[f64], lambda: f64, floor: f64) -> bool {
    rho.iter().zip(d).all(|(a, b)| a + lambda * b >= floor)
}

/// One implicit step from `old` with the configured time-step rule.
pub fn solve_time_step(mesh: &Mesh, old: &State, params: &SchemeParams) -> Result<(State, StepReport)> {
    let mut stepper = Stepper::new(mesh, params, old)?;
    let dt = stepper.next_dt(old)?;
    stepper.step(old, dt)
}

/// `Δt = CFL h / max_E (|⟨u⟩_E| + sqrt(p'(ρ_E)))`, falling back to `c_t h`
/// when the wave speed vanishes.
pub fn adapt_dt(mesh: &Mesh, state: &State, params: &SchemeParams) -> Result<f64> {
    let DtRule::Cfl(cfl) = params.dt_rule else {
        return Err(Error::Config("adapt_dt requires the cfl time-step rule".into()));
    };
    let speed = (0..mesh.num_cells())
        .map(|c| {
            let rho = state.rho[c];
            state.u.cell_average(mesh, c).norm() + (params.a * params.gamma * rho.powf(params.gamma - 1.0)).sqrt()
        })
        .fold(0.0, f64::max);
    if speed > 0.0 && speed.is_finite() {
        Ok(cfl * mesh.h() / speed)
    } else {
        Ok(params.c_t * mesh.h())
    }
}

/// A run that stopped early, with everything accepted before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub partial: Trajectory,
    pub error: Error,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted after {} accepted steps: {}",
            self.partial.len().saturating_sub(1),
            self.error
        )
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

/// Steps from `initial` to `params.t_end`. The last fixed step is shortened
/// if needed to land on `t_end`.
pub fn run(mesh: &Mesh, initial: State, params: &SchemeParams) -> std::result::Result<Trajectory, RunFailure> {
    run_with(mesh, initial, params, |_, _| {})
}

/// Like [`run`], calling `observer` after every accepted step.
pub fn run_with(
    mesh: &Mesh,
    initial: State,
    params: &SchemeParams,
    mut observer: impl FnMut(&State, &StepReport),
) -> std::result::Result<Trajectory, RunFailure> {
    let mut stepper = match Stepper::new(mesh, params, &initial) {
        Ok(s) => s,
        Err(error) => {
            return Err(RunFailure {
                partial: Trajectory::new(initial),
                error,
            })
        }
    };
    let mass0 = initial.mass(mesh);
    let mut traj = Trajectory::new(initial);
    loop {
        let old = traj.last();
        let remaining = params.t_end - old.t;
        let dt = match stepper.next_dt(old) {
            Ok(dt) => dt,
            Err(error) => return Err(RunFailure { partial: traj, error }),
        };
        if remaining <= 1e-9 * dt {
            break;
        }
        let dt = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
        match stepper.step(old, dt) {
            Ok((mut new, mut report)) => {
                report.mass_drift = (report.mass - mass0) / mass0;
                if (params.t_end - new.t).abs() <= 1e-9 * dt {
                    new.t = params.t_end;
                    report.t = params.t_end;
                }
                observer(&new, &report);
                traj.states.push(new);
                traj.reports.push(report);
            }
            Err(error) => return Err(RunFailure { partial: traj, error }),
        }
    }
    Ok(traj)
}
