//! Piecewise-constant (`Q_h`) and Crouzeix-Raviart (`V_h`) fields.
//!
//! A [`CrField`] stores one vector per face, the face mean of the cell-wise
//! affine representative. On a cell with local faces `i = 0..4` the
//! representative is `Σ u_i φ_i` with `φ_i = 1 - 3 λ_i`, where `λ_i` is the
//! barycentric coordinate of the opposite vertex.

mod fields;
mod io;
mod norms;
pub mod probes;
mod traces;

pub use fields::{project_q, project_v, BoundaryPolicy, CrField, FieldValue, QField};
pub use io::{read_crfield, read_qfield, write_crfield, write_qfield};
pub use norms::{
    broken_h1_seminorm, broken_norm, cr_lp_norm, face_jump_seminorm, q_face_jump_seminorm, q_lp_norm, Exponent,
    FieldRef, NormKind,
};
pub use traces::{cr_traces, q_traces, FaceTracePair};
