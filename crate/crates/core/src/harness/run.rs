//! Single runs: mesh and initial data from a config, trajectory output and
//! ledger recomputation from saved snapshots.
//!
//! A run directory holds
//!
//! ```text
//! config.txt       canonical config
//! mesh.txt         the mesh
//! steps.csv        one row per step
//! snapshots.csv    k,t,dt,rho_file,u_file of every saved state
//! snapshots/       rho_<k>.qfield, u_<k>.crfield (and state_<k>.vtk)
//! summary.txt
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ForcingMode, InitialData, MeshSource, RunConfig};
use super::manufactured::ManufacturedCase;
use super::output::{create_dir, read_file, steps_csv, vtk_string, write_file};
use crate::diagnostics::{step_ledger_dt, StepReport};
use crate::mesh::{build_box_mesh_with, read_mesh_str, write_mesh_string, Mesh, MeshOptions, Point};
use crate::scheme::{run_with, DtRule, SchemeParams, State, Trajectory};
use crate::spaces::{read_crfield, read_qfield, write_crfield, write_qfield, CrField, QField};
use crate::{Error, Result};

pub fn load_mesh(config: &RunConfig) -> Result<Mesh> {
    let options = MeshOptions {
        shape_cap: config.shape_cap,
    };
    match &config.mesh {
        MeshSource::Box { n, domain } => build_box_mesh_with(domain, *n, options),
        MeshSource::File(path) => {
            let text = read_file(path)?;
            read_mesh_str(&text, &path.display().to_string(), options)
        }
    }
}

/// The manufactured case of the config on the mesh's bounding box.
pub fn manufactured_case(config: &RunConfig, mesh: &Mesh) -> ManufacturedCase {
    ManufacturedCase::new(config.case, mesh.bounding_box(), &config.params)
}

pub fn initial_state(config: &RunConfig, mesh: &Mesh) -> Result<State> {
    match &config.initial {
        InitialData::Constant { rho } => {
            if !(*rho > 0.0) {
                return Err(Error::Config(format!("rho0 must be positive, got {rho}")));
            }
            Ok(State::constant(mesh, *rho))
        }
        InitialData::Gaussian {
            rho,
            amplitude,
            width,
            center,
        } => {
            if !(*width > 0.0) {
                return Err(Error::Config(format!("width must be positive, got {width}")));
            }
            let domain = mesh.bounding_box();
            let c = center.unwrap_or((domain.min + domain.max) / 2.0);
            let s = 2.0 * width * width;
            State::project(
                mesh,
                |x| rho + amplitude * (-(x - c).norm_squared() / s).exp(),
                |_| Vector3::zeros(),
            )
        }
        InitialData::Random {
            rho,
            amplitude,
            velocity,
        } => {
            if !(*rho > 0.0 && *amplitude >= 0.0 && *amplitude < 1.0) {
                return Err(Error::Config(format!(
                    "random initial data needs rho0 > 0 and amplitude in [0, 1), got {rho}, {amplitude}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let values = (0..mesh.num_cells())
                .map(|_| rho * (1.0 + amplitude * rng.gen_range(-1.0..=1.0)))
                .collect();
            let mut u = CrField::from_dofs(
                (0..mesh.num_faces())
                    .map(|_| Vector3::from_fn(|_, _| velocity * rng.gen_range(-1.0..=1.0)))
                    .collect(),
            );
            u.zero_boundary(mesh);
            Ok(State::new(QField::from_values(values), u, 0.0, 0))
        }
        InitialData::Manufactured(_) => {
            let case = manufactured_case(config, mesh);
            State::project(mesh, |x| case.density(0.0, x), |x| case.velocity(0.0, x))
        }
    }
}

/// Scheme parameters of a run on `mesh`: forcing attached and `t_end` set
/// from `steps` when given.
pub fn run_params(config: &RunConfig, mesh: &Mesh) -> Result<SchemeParams> {
    let mut params = config.params.clone();
    let forcing = match config.forcing {
        ForcingMode::Auto => matches!(config.initial, InitialData::Manufactured(_)),
        ForcingMode::On => true,
        ForcingMode::Off => false,
    };
    if forcing {
        params.forcing = Some(Arc::new(manufactured_case(config, mesh)));
    }
    if let Some(steps) = config.steps {
        if params.dt_rule != DtRule::Fixed {
            return Err(Error::Config("steps needs dt_rule = fixed".into()));
        }
        params.t_end = steps as f64 * params.fixed_dt(mesh.h());
    }
    params.validate()?;
    Ok(params)
}

/// Mesh, initial state and parameters of a run.
pub struct Prepared {
    pub mesh: Mesh,
    pub initial: State,
    pub params: SchemeParams,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let mesh = load_mesh(config)?;
    let initial = initial_state(config, &mesh)?;
    let params = run_params(config, &mesh)?;
    Ok(Prepared { mesh, initial, params })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub max_slack: f64,
    /// Smallest of the five numerical dissipation entries over all steps.
    pub min_dissipation: f64,
    pub max_abs_mass_drift: f64,
    pub min_density: f64,
    pub newton_iterations: usize,
}

impl RunSummary {
    pub fn new(traj: &Trajectory) -> Self {
        let r = &traj.reports;
        RunSummary {
            steps: r.len(),
            t_final: traj.last().t,
            max_slack: r.iter().map(|r| r.slack).fold(f64::NEG_INFINITY, f64::max),
            min_dissipation: r
                .iter()
                .flat_map(|r| r.num_dissipation)
                .fold(f64::INFINITY, f64::min),
            max_abs_mass_drift: r.iter().map(|r| r.mass_drift.abs()).fold(0.0, f64::max),
            min_density: traj.states.iter().map(|s| s.rho.min()).fold(f64::INFINITY, f64::min),
            newton_iterations: r.iter().map(|r| r.newton_iterations).sum(),
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "steps = {}\nt_final = {:e}\nmax_slack = {:e}\nmin_dissipation = {:e}\nmax_abs_mass_drift = {:e}\nmin_density = {:e}\nnewton_iterations = {}\n",
            self.steps,
            self.t_final,
            self.max_slack,
            self.min_dissipation,
            self.max_abs_mass_drift,
            self.min_density,
            self.newton_iterations
        )
    }
}

pub struct RunOutcome {
    pub mesh: Mesh,
    pub params: SchemeParams,
    pub trajectory: Trajectory,
    pub summary: RunSummary,
}

struct SnapshotWriter<'a> {
    dir: PathBuf,
    mesh: &'a Mesh,
    vtk: bool,
    index: String,
    error: Option<Error>,
}

impl<'a> SnapshotWriter<'a> {
    fn new(out: &Path, mesh: &'a Mesh, vtk: bool) -> Result<Self> {
        let dir = out.join("snapshots");
        create_dir(&dir)?;
        Ok(SnapshotWriter {
            dir,
            mesh,
            vtk,
            index: String::from("k,t,dt,rho_file,u_file\n"),
            error: None,
        })
    }

    fn save(&mut self, state: &State, dt: f64) {
        if self.error.is_some() {
            return;
        }
        let rho = format!("rho_{:06}.qfield", state.k);
        let u = format!("u_{:06}.crfield", state.k);
        let mut result = write_file(&self.dir.join(&rho), &write_qfield(&state.rho))
            .and_then(|_| write_file(&self.dir.join(&u), &write_crfield(&state.u)));
        if self.vtk {
            result = result.and_then(|_| {
                write_file(
                    &self.dir.join(format!("state_{:06}.vtk", state.k)),
                    &vtk_string(self.mesh, state),
                )
            });
        }
        match result {
            Ok(()) => {
                let _ = writeln!(self.index, "{},{:e},{:e},{rho},{u}", state.k, state.t, dt);
            }
            Err(e) => self.error = Some(e),
        }
    }
}

/// Runs `config`, writing everything to `out`. On a step failure the
/// completed steps are still written and the error is returned.
pub fn run_to_dir(config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let Prepared { mesh, initial, params } = prepare(config)?;
    create_dir(out)?;
    write_file(&out.join("config.txt"), &config.to_text())?;
    write_file(&out.join("mesh.txt"), &write_mesh_string(&mesh))?;

    let mut snaps = SnapshotWriter::new(out, &mesh, config.vtk)?;
    snaps.save(&initial, 0.0);
    let every = config.save_every;
    let mut last_saved = 0;
    let started = std::time::Instant::now();
    let result = run_with(&mesh, initial, &params, |state, report| {
        if every > 0 && state.k % every == 0 {
            snaps.save(state, report.dt);
            last_saved = state.k;
        }
    });
    let elapsed = started.elapsed();
    let (trajectory, failure) = match result {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    let last = trajectory.last();
    if last.k != last_saved {
        snaps.save(last, trajectory.reports.last().map_or(0.0, |r| r.dt));
    }
    write_file(&out.join("steps.csv"), &steps_csv(&trajectory.reports, true))?;
    write_file(&out.join("snapshots.csv"), &snaps.index)?;
    if let Some(e) = snaps.error {
        return Err(e);
    }
    let summary = RunSummary::new(&trajectory);
    let mut text = summary.to_text();
    if let Some(e) = &failure {
        let _ = writeln!(text, "failure = {}", e.to_string().replace('\n', " "));
    }
    if !config.reproducible {
        let _ = writeln!(text, "elapsed_seconds = {:.3}", elapsed.as_secs_f64());
    }
    write_file(&out.join("summary.txt"), &text)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunOutcome {
        mesh,
        params,
        trajectory,
        summary,
    })
}

/// Saved states of a run directory, in index order, with the step size
/// that produced each.
pub fn read_snapshots(dir: &Path, mesh: &Mesh) -> Result<Vec<(State, f64)>> {
    let index_path = dir.join("snapshots.csv");
    let index = read_file(&index_path)?;
    let source = index_path.display().to_string();
    let mut states = Vec::new();
    for (i, line) in index.lines().enumerate().skip(1) {
        let perr = |message: String| Error::Parse {
            source_name: source.clone(),
            line: i + 1,
            message,
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(perr(format!("expected 5 columns, got {}", cols.len())));
        }
        let k: usize = cols[0].parse().map_err(|e| perr(format!("k: {e}")))?;
        let t: f64 = cols[1].parse().map_err(|e| perr(format!("t: {e}")))?;
        let dt: f64 = cols[2].parse().map_err(|e| perr(format!("dt: {e}")))?;
        let rho_path = dir.join("snapshots").join(cols[3]);
        let u_path = dir.join("snapshots").join(cols[4]);
        let rho = read_qfield(&read_file(&rho_path)?, &rho_path.display().to_string())?;
        let u = read_crfield(&read_file(&u_path)?, &u_path.display().to_string())?;
        let state = State::new(rho, u, t, k);
        state.check_mesh(mesh)?;
        states.push((state, dt));
    }
    if states.is_empty() {
        return Err(Error::InvalidInput(format!("{source} lists no snapshots")));
    }
    Ok(states)
}

/// Recomputes the ledger between consecutive saved states of a run
/// directory. With `save_every = 1` the rows equal those of `steps.csv`
/// without the solver columns.
pub fn recompute_ledger(dir: &Path) -> Result<Vec<StepReport>> {
    let config = RunConfig::from_file(&dir.join("config.txt"))?;
    let mesh_path = dir.join("mesh.txt");
    let mesh = read_mesh_str(
        &read_file(&mesh_path)?,
        &mesh_path.display().to_string(),
        MeshOptions {
            shape_cap: config.shape_cap,
        },
    )?;
    let params = run_params(&config, &mesh)?;
    let states = read_snapshots(dir, &mesh)?;
    let mass0 = states[0].0.mass(&mesh);
    let mut reports = Vec::with_capacity(states.len() - 1);
    for w in states.windows(2) {
        let ((old, _), (new, dt)) = (&w[0], &w[1]);
        let mut r = step_ledger_dt(&mesh, old, new, *dt, &params)?;
        r.mass_drift = (r.mass - mass0) / mass0;
        reports.push(r);
    }
    Ok(reports)
}

/// Centre of the mesh's bounding box, the default Gaussian centre.
pub fn box_center(mesh: &Mesh) -> Point {
    let b = mesh.bounding_box();
    (b.min + b.max) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::RunConfig;

    fn config(text: &str) -> RunConfig {
        RunConfig::parse(text, "test").unwrap()
    }

    #[test]
    fn random_initial_data_is_seeded() {
        let c = config("n = 2\ninitial = random\nseed = 5\n");
        let mesh = load_mesh(&c).unwrap();
        let a = initial_state(&c, &mesh).unwrap();
        let b = initial_state(&c, &mesh).unwrap();
        assert_eq!(a, b);
        assert!(a.u.is_in_v0(&mesh));
        let other = initial_state(&config("n = 2\ninitial = random\nseed = 6\n"), &mesh).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn steps_sets_the_final_time() {
        let c = config("n = 2\nsteps = 3\ndt = 0.01\n");
        let p = prepare(&c).unwrap();
        assert!((p.params.t_end - 0.03).abs() < 1e-15);
        assert!(p.params.forcing.is_none());
        let c = config("n = 2\ninitial = manufactured\ncase = acoustic\n");
        assert!(prepare(&c).unwrap().params.forcing.is_some());
    }

    #[test]
    fn gaussian_defaults_to_box_centre() {
        let c = config("n = 2\nbox = 2 1 1\nwidth = 0.3\n");
        let mesh = load_mesh(&c).unwrap();
        let s = initial_state(&c, &mesh).unwrap();
        let top = (0..mesh.num_cells()).max_by(|&a, &b| s.rho[a].total_cmp(&s.rho[b])).unwrap();
        let dist = (mesh.geometry(top).centroid - box_center(&mesh)).norm();
        assert!(dist < mesh.h(), "{dist}");
    }

    #[test]
    fn missing_mesh_file_is_named() {
        let c = config("mesh = /nonexistent/dir/m.txt\n");
        let err = prepare(&c).err().unwrap().to_string();
        assert!(err.contains("/nonexistent/dir/m.txt"), "{err}");
    }

    #[test]
    fn recomputed_ledger_matches_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("n = 2\nsteps = 3\n");
        let out = run_to_dir(&c, dir.path()).unwrap();
        let again = recompute_ledger(dir.path()).unwrap();
        assert_eq!(steps_csv(&out.trajectory.reports, false), steps_csv(&again, false));
    }
}
