//! Mixed finite-element/finite-volume solver for the isentropic compressible
//! Navier-Stokes system on tetrahedral meshes.
//!
//! Density lives in the piecewise-constant space on cells, velocity in the
//! Crouzeix-Raviart space with one vector degree of freedom per face. Each
//! time step is an implicit coupled solve of the discrete continuity and
//! momentum equations, with convective terms approximated by a dissipative
//! upwind flux.
//!
//! The crate is organised as
//!
//! - [`mesh`]: box meshes (Kuhn subdivision), mesh I/O, quadrature;
//! - [`spaces`]: discrete fields, projections, traces and broken norms;
//! - [`scheme`]: pressure law, upwind flux, residual assembly, Newton solver
//!   and time stepping;
//! - [`diagnostics`]: per-step energy ledger, consistency residuals and
//!   error norms against reference solutions;
//! - [`harness`]: run/study configuration, manufactured solutions and
//!   report output used by the command-line tool.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod scheme;
pub mod spaces;

pub use error::{Error, Result};
pub use mesh::{BoxDomain, Face, FaceKind, Mesh, MeshOptions, Point};
pub use scheme::{SchemeParams, State, Trajectory};
pub use spaces::{CrField, QField};
