use nalgebra::Vector3;

use super::eos::pressure_and_derivative;
use super::SchemeParams;
use crate::diagnostics::StepReport;
use crate::mesh::{Mesh, Point};
use crate::spaces::{project_q, project_v, BoundaryPolicy, CrField, QField};
use crate::{Error, Result};

/// Density and velocity at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub rho: QField,
    pub u: CrField,
    pub t: f64,
    pub k: usize,
}

impl State {
    pub fn new(rho: QField, u: CrField, t: f64, k: usize) -> Self {
        State { rho, u, t, k }
    }

    /// `ρ ≡ rho`, `u ≡ 0` at `t = 0`.
    pub fn constant(mesh: &Mesh, rho: f64) -> Self {
        State {
            rho: QField::constant(mesh, rho),
            u: CrField::zeros(mesh),
            t: 0.0,
            k: 0,
        }
    }

    /// `ρ⁰ = Π^Q ρ₀`, `u⁰ = Π^V u₀` with zero boundary means.
    pub fn project(mesh: &Mesh, rho0: impl Fn(&Point) -> f64, u0: impl Fn(&Point) -> Vector3<f64>) -> Result<Self> {
        let rho = project_q(mesh, rho0);
        let min = rho.min();
        if !(min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "initial density must be positive, projected minimum is {min}"
            )));
        }
        Ok(State {
            rho,
            u: project_v(mesh, u0, BoundaryPolicy::Zero),
            t: 0.0,
            k: 0,
        })
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        self.rho.check_mesh(mesh)?;
        self.u.check_mesh(mesh)
    }

    /// Cell momenta `ρ ⟨u⟩`.
    pub fn cell_momenta(&self, mesh: &Mesh) -> QField<Vector3<f64>> {
        QField::from_values(
            (0..mesh.num_cells())
                .map(|c| self.u.cell_average(mesh, c) * self.rho[c])
                .collect(),
        )
    }

    pub fn mass(&self, mesh: &Mesh) -> f64 {
        self.rho.integral(mesh)
    }

    /// `∫ ½ ρ |⟨u⟩|² + P(ρ)`.
    pub fn energy(&self, mesh: &Mesh, params: &SchemeParams) -> f64 {
        (0..mesh.num_cells())
            .map(|c| {
                let rho = self.rho[c];
                let avg = self.u.cell_average(mesh, c);
                let (p, _) = pressure_and_derivative(rho, params.a, params.gamma);
                mesh.geometry(c).volume * (0.5 * rho * avg.norm_squared() + p / (params.gamma - 1.0))
            })
            .sum()
    }
}

/// Accepted states with the report of every step.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub reports: Vec<StepReport>,
}

impl Trajectory {
    pub fn new(initial: State) -> Self {
        Trajectory {
            states: vec![initial],
            reports: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// Index of the state held at time `t`: state `k` on `[t_k, t_{k+1})`,
    /// the initial state before `t_1` and the last state from its time on.
    pub fn index_at(&self, t: f64) -> usize {
        let k = self.states.partition_point(|s| s.t <= t);
        k.saturating_sub(1)
    }

    pub fn state_at(&self, t: f64) -> &State {
        &self.states[self.index_at(t)]
    }
}
