//! Run and study orchestration behind the command-line tool: configuration
//! files, initial data, manufactured solutions, refinement studies and
//! report output.

mod config;
mod manufactured;
mod output;
mod run;
mod study;

pub use config::{ForcingMode, InitialData, MeshSource, RunConfig, StudyConfig, StudyKind, DEFAULT_SEED};
pub use manufactured::{CaseKind, ManufacturedCase};
pub use output::{consistency_csv, errors_csv, steps_csv, vtk_string};
pub use run::{
    box_center, initial_state, load_mesh, manufactured_case, prepare, read_snapshots, recompute_ledger, run_params,
    run_to_dir, Prepared, RunOutcome, RunSummary,
};
pub use study::{default_sub_box, run_study, study_dt, sweep_alpha, EnergyRow, StudyOutcome, GAMMA_SWEEP};
