//! Energy ledger, upwind identity, consistency residuals and error norms.

mod consistency;
mod errors;
mod fit;
mod identity;
mod ledger;

pub use consistency::{
    consistency_level, consistency_residuals, standard_test_functions, ConsistencyLevel, ConsistencyReport,
    TestFunction,
};
pub use errors::{error_level, error_vs_reference, ErrorLevel, ErrorReport, Reference, TrajectoryReference};
pub use fit::{fit_power_law, PowerFit};
pub use identity::{upwind_identity_check, upwind_identity_terms, IdentityTerms};
pub(crate) use ledger::step_ledger_dt;
pub use ledger::{step_ledger, StepReport, NUM_DISSIPATION_NAMES};
