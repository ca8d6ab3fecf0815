//! Shared fixtures for the benchmarks.

use isoflow_core::mesh::build_box_mesh;
use isoflow_core::{BoxDomain, Mesh, Point, State};
use nalgebra::Vector3;

pub fn cube(n: usize) -> Mesh {
    build_box_mesh(&BoxDomain::unit(), [n, n, n]).expect("valid box")
}

/// Gaussian bump at rest with a small shear flow.
pub fn bump(mesh: &Mesh) -> State {
    let c = Point::new(0.5, 0.5, 0.5);
    State::project(
        mesh,
        |x| 1.0 + 0.5 * (-(x - c).norm_squared() / 0.08).exp(),
        |x| Vector3::new(x.y * (1.0 - x.y), 0.0, 0.0) * 0.1,
    )
    .expect("positive density")
}
