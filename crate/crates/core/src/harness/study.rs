//! Refinement studies over box meshes with `n³` cells per level.
//!
//! Every level writes its run to `level_<n>/` (`gamma_<γ>/level_<n>/` in an
//! energy sweep). The merged tables are
//!
//! - `energy.csv`: `gamma,alpha,n,h,steps,max_slack,min_dissipation,max_abs_mass_drift,min_density`;
//! - `consistency.csv`: `n,h,test,continuity,momentum`, with a `total` row per level;
//! - `errors.csv`: `n,h,norm,error`;
//!
//! and `summary.txt` holds the fitted exponents. A failing level aborts the
//! study after writing the tables of the completed levels.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{InitialData, MeshSource, RunConfig, StudyConfig, StudyKind};
use super::output::{consistency_csv, create_dir, errors_csv, write_file};
use super::run::{manufactured_case, run_to_dir, RunSummary};
use crate::diagnostics::{
    consistency_level, error_level, fit_power_law, standard_test_functions, ConsistencyLevel, ErrorLevel, PowerFit,
};
use crate::mesh::BoxDomain;
use crate::Result;

/// `α = min(0.5, 0.9 · 2(γ - 1))`, used by energy sweeps.
pub fn sweep_alpha(gamma: f64) -> f64 {
    (0.9 * 2.0 * (gamma - 1.0)).min(0.5)
}

pub const GAMMA_SWEEP: [f64; 4] = [1.2, 1.4, 1.6, 1.8];

/// `Δt = T / ⌈T / (c_t h)⌉`: the largest step not above `c_t h` that
/// divides `T`.
pub fn study_dt(t_end: f64, c_t: f64, h: f64) -> f64 {
    let steps = (t_end / (c_t * h) - 1e-9).ceil().max(1.0);
    t_end / steps
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRow {
    pub gamma: f64,
    pub alpha: f64,
    pub n: usize,
    pub h: f64,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyOutcome {
    pub energy: Vec<EnergyRow>,
    pub consistency: Vec<(usize, ConsistencyLevel)>,
    pub beta_c: Option<PowerFit>,
    pub beta_m: Option<PowerFit>,
    pub errors: Vec<(usize, ErrorLevel)>,
    pub density_order: Option<PowerFit>,
    pub velocity_order: Option<PowerFit>,
}

impl StudyOutcome {
    pub fn max_slack(&self) -> f64 {
        self.energy.iter().map(|r| r.summary.max_slack).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_dissipation(&self) -> f64 {
        self.energy
            .iter()
            .map(|r| r.summary.min_dissipation)
            .fold(f64::INFINITY, f64::min)
    }

    /// Both error norms strictly decrease from level to level.
    pub fn errors_decrease(&self) -> bool {
        self.errors
            .windows(2)
            .all(|w| w[1].1.density < w[0].1.density && w[1].1.velocity < w[0].1.velocity)
    }

    fn energy_csv(&self) -> String {
        let mut s = String::from("gamma,alpha,n,h,steps,max_slack,min_dissipation,max_abs_mass_drift,min_density\n");
        for r in &self.energy {
            let _ = writeln!(
                s,
                "{:?},{:?},{},{:e},{},{:e},{:e},{:e},{:e}",
                r.gamma,
                r.alpha,
                r.n,
                r.h,
                r.summary.steps,
                r.summary.max_slack,
                r.summary.min_dissipation,
                r.summary.max_abs_mass_drift,
                r.summary.min_density
            );
        }
        s
    }

    fn summary(&self, kind: StudyKind) -> String {
        let mut s = format!("kind = {}\n", kind.name());
        let fit = |s: &mut String, name: &str, f: &Option<PowerFit>| match f {
            Some(f) => {
                let _ = writeln!(s, "{name} = {:e}\n{name}_r_squared = {:e}", f.order, f.r_squared);
            }
            None => {
                let _ = writeln!(s, "{name} = none");
            }
        };
        match kind {
            StudyKind::Energy => {
                let _ = writeln!(
                    s,
                    "runs = {}\nmax_slack = {:e}\nmin_dissipation = {:e}",
                    self.energy.len(),
                    self.max_slack(),
                    self.min_dissipation()
                );
            }
            StudyKind::Consistency => {
                fit(&mut s, "beta_c", &self.beta_c);
                fit(&mut s, "beta_m", &self.beta_m);
            }
            StudyKind::Mms => {
                fit(&mut s, "density_order", &self.density_order);
                fit(&mut s, "velocity_order", &self.velocity_order);
                let _ = writeln!(s, "monotone = {}", self.errors_decrease());
            }
        }
        s
    }

    fn write(&self, kind: StudyKind, out: &Path) -> Result<()> {
        match kind {
            StudyKind::Energy => write_file(&out.join("energy.csv"), &self.energy_csv())?,
            StudyKind::Consistency => write_file(&out.join("consistency.csv"), &consistency_csv(&self.consistency))?,
            StudyKind::Mms => write_file(&out.join("errors.csv"), &errors_csv(&self.errors))?,
        }
        write_file(&out.join("summary.txt"), &self.summary(kind))
    }

    fn fit(&mut self) {
        let hc: Vec<f64> = self.consistency.iter().map(|(_, l)| l.h).collect();
        let c: Vec<f64> = self.consistency.iter().map(|(_, l)| l.total_continuity()).collect();
        let m: Vec<f64> = self.consistency.iter().map(|(_, l)| l.total_momentum()).collect();
        self.beta_c = fit_power_law(&hc, &c).ok();
        self.beta_m = fit_power_law(&hc, &m).ok();
        let he: Vec<f64> = self.errors.iter().map(|(_, l)| l.h).collect();
        let d: Vec<f64> = self.errors.iter().map(|(_, l)| l.density).collect();
        let v: Vec<f64> = self.errors.iter().map(|(_, l)| l.velocity).collect();
        self.density_order = fit_power_law(&he, &d).ok();
        self.velocity_order = fit_power_law(&he, &v).ok();
    }
}

fn level_config(base: &RunConfig, n: usize) -> (RunConfig, BoxDomain) {
    let mut c = base.clone();
    let domain = match base.mesh {
        MeshSource::Box { domain, .. } => domain,
        MeshSource::File(_) => unreachable!("validated"),
    };
    c.mesh = MeshSource::Box { n: [n; 3], domain };
    (c, domain)
}

/// Runs every level of the study and writes the merged tables to `out`.
pub fn run_study(config: &StudyConfig, out: &Path) -> Result<StudyOutcome> {
    config.validate()?;
    create_dir(out)?;
    let mut outcome = StudyOutcome::default();
    let result = run_levels(config, out, &mut outcome);
    outcome.fit();
    outcome.write(config.kind, out)?;
    result.map(|_| outcome)
}

fn run_levels(config: &StudyConfig, out: &Path, outcome: &mut StudyOutcome) -> Result<()> {
    let base = &config.base;
    match config.kind {
        StudyKind::Energy => {
            let sweep = !config.gammas.is_empty();
            let gammas = if sweep { config.gammas.clone() } else { vec![base.params.gamma] };
            for gamma in gammas {
                for &n in &config.levels {
                    let (mut c, _) = level_config(base, n);
                    c.params.gamma = gamma;
                    if sweep {
                        c.params.alpha = sweep_alpha(gamma);
                    }
                    let dir = if sweep {
                        out.join(format!("gamma_{gamma:?}")).join(format!("level_{n}"))
                    } else {
                        out.join(format!("level_{n}"))
                    };
                    let run = run_to_dir(&c, &dir)?;
                    outcome.energy.push(EnergyRow {
                        gamma,
                        alpha: c.params.alpha,
                        n,
                        h: run.mesh.h(),
                        summary: run.summary,
                    });
                }
            }
        }
        StudyKind::Consistency | StudyKind::Mms => {
            for &n in &config.levels {
                let (mut c, domain) = level_config(base, n);
                if config.kind == StudyKind::Mms {
                    c.initial = InitialData::Manufactured(c.case);
                }
                c.steps = None;
                let h = 3f64.sqrt() * domain.lengths().max() / n as f64;
                c.params.dt = Some(study_dt(c.params.t_end, c.params.c_t, h));
                let run = run_to_dir(&c, &out.join(format!("level_{n}")))?;
                if config.kind == StudyKind::Consistency {
                    let tests = standard_test_functions(&domain, run.params.t_end);
                    let level = consistency_level(&run.mesh, &run.trajectory, &tests, &run.params)?;
                    outcome.consistency.push((n, level));
                } else {
                    let k = config.sub_box.unwrap_or_else(|| default_sub_box(&domain));
                    let case = manufactured_case(&c, &run.mesh);
                    let level = error_level(&run.mesh, &run.trajectory, &case, &k, &run.params)?;
                    outcome.errors.push((n, level));
                }
            }
        }
    }
    Ok(())
}

/// The middle half of the box in every direction.
pub fn default_sub_box(domain: &BoxDomain) -> BoxDomain {
    let l = domain.lengths();
    BoxDomain::new(domain.min + l * 0.25, domain.min + l * 0.75)
}
