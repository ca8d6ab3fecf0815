//! Pressure law, upwind flux, residual assembly and implicit time stepping.

mod assembly;
mod eos;
mod linear;
mod params;
mod solver;
mod state;
mod upwind;

pub use assembly::{assemble_continuity_residual, assemble_momentum_residual, Terms};
pub use eos::{chi, pressure, pressure_potential, pressure_potential_second};
pub use params::{default_alpha, DtRule, Forcing, LinearSolverKind, SchemeParams};
pub use solver::{adapt_dt, run, run_with, solve_time_step, RunFailure, SolveStats, StepError, Stepper};
pub use state::{State, Trajectory};
pub use upwind::{upwind, UpwindFlux};

pub(crate) use assembly::{forcing_load, Layout};
pub(crate) use eos::pressure_and_derivative;
