use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::mesh::Point;
use crate::{Error, Result};

/// Momentum source `f(t, x)`, used only for manufactured solutions.
pub trait Forcing: Send + Sync {
    fn momentum_source(&self, t: f64, x: &Point) -> Vector3<f64>;
}

impl<F> Forcing for F
where
    F: Fn(f64, &Point) -> Vector3<f64> + Send + Sync,
{
    fn momentum_source(&self, t: f64, x: &Point) -> Vector3<f64> {
        self(t, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    /// `Δt = dt` if set, else `c_t h`.
    Fixed,
    /// `Δt = CFL h / max(|⟨u⟩| + c)`.
    Cfl(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolverKind {
    /// Direct below `direct_threshold` unknowns, GMRES above.
    Auto,
    Direct,
    Gmres,
}

#[derive(Clone)]
pub struct SchemeParams {
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    pub eta: f64,
    pub alpha: f64,
    /// Ratio `Δt / h` when no explicit `dt` is set.
    pub c_t: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub dt_rule: DtRule,
    pub forcing: Option<Arc<dyn Forcing>>,
    /// Scaled max-norm tolerance on both residuals.
    pub tol_nonlinear: f64,
    pub max_iterations: usize,
    pub linear_solver: LinearSolverKind,
    pub direct_threshold: usize,
    pub gmres_tol: f64,
    pub gmres_restart: usize,
}

impl fmt::Debug for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchemeParams")
            .field("a", &self.a)
            .field("gamma", &self.gamma)
            .field("mu", &self.mu)
            .field("eta", &self.eta)
            .field("alpha", &self.alpha)
            .field("c_t", &self.c_t)
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .field("dt_rule", &self.dt_rule)
            .field("forcing", &self.forcing.is_some())
            .field("tol_nonlinear", &self.tol_nonlinear)
            .field("max_iterations", &self.max_iterations)
            .field("linear_solver", &self.linear_solver)
            .finish()
    }
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            a: 1.0,
            gamma: 1.4,
            mu: 0.1,
            eta: 0.0,
            alpha: default_alpha(1.4),
            c_t: 0.5,
            dt: None,
            t_end: 1.0,
            dt_rule: DtRule::Fixed,
            forcing: None,
            tol_nonlinear: 1e-10,
            max_iterations: 50,
            linear_solver: LinearSolverKind::Auto,
            direct_threshold: 10_000,
            gmres_tol: 1e-12,
            gmres_restart: 60,
        }
    }
}

impl SchemeParams {
    /// Defaults with the given `γ` and `α = min(0.5, γ - 1)`.
    pub fn with_gamma(gamma: f64) -> Self {
        SchemeParams {
            gamma,
            alpha: default_alpha(gamma),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.a > 0.0) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.gamma > 1.0 && self.gamma < 2.0) {
            return bad(format!("gamma must lie in (1, 2), got {}", self.gamma));
        }
        if !(self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.eta >= 0.0) {
            return bad(format!("eta must be nonnegative, got {}", self.eta));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0 * (self.gamma - 1.0)) {
            return bad(format!(
                "alpha must lie in (0, 2(gamma - 1)) = (0, {}), got {}",
                2.0 * (self.gamma - 1.0),
                self.alpha
            ));
        }
        if !(self.c_t > 0.0) {
            return bad(format!("c_t must be positive, got {}", self.c_t));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.t_end >= 0.0) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if let DtRule::Cfl(cfl) = self.dt_rule {
            if !(cfl > 0.0 && cfl <= 1.0) {
                return bad(format!("cfl must lie in (0, 1], got {cfl}"));
            }
        }
        if !(self.tol_nonlinear > 0.0) || self.max_iterations == 0 {
            return bad("tol_nonlinear and max_iterations must be positive".into());
        }
        if !(self.gmres_tol > 0.0) || self.gmres_restart == 0 {
            return bad("gmres_tol and gmres_restart must be positive".into());
        }
        Ok(())
    }

    /// `Δt` for the fixed rule on a mesh of size `h`.
    pub fn fixed_dt(&self, h: f64) -> f64 {
        self.dt.unwrap_or(self.c_t * h)
    }

    /// `h^α`.
    pub fn h_alpha(&self, h: f64) -> f64 {
        h.powf(self.alpha)
    }
}

pub fn default_alpha(gamma: f64) -> f64 {
    (gamma - 1.0).min(0.5)
}
