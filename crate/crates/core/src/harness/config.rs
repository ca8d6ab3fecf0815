//! `key = value` run and study configuration.
//!
//! Blank lines and text after `#` are ignored. Lists are whitespace
//! separated. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::manufactured::CaseKind;
use crate::mesh::{BoxDomain, Point};
use crate::scheme::{default_alpha, DtRule, LinearSolverKind, SchemeParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Box { n: [usize; 3], domain: BoxDomain },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Constant { rho: f64 },
    /// `ρ = rho + amplitude exp(-|x - center|² / (2 width²))`, `u = 0`.
    Gaussian { rho: f64, amplitude: f64, width: f64, center: Option<Point> },
    /// Cell densities `rho (1 + amplitude ξ)` and face velocities
    /// `velocity ξ'` with `ξ, ξ'` uniform on `[-1, 1]`.
    Random { rho: f64, amplitude: f64, velocity: f64 },
    Manufactured(CaseKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingMode {
    /// On exactly for manufactured initial data.
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub shape_cap: f64,
    /// Forcing is attached when the run is prepared.
    pub params: SchemeParams,
    pub initial: InitialData,
    pub forcing: ForcingMode,
    pub case: CaseKind,
    /// If set, `t_end = steps · Δt` for the fixed rule.
    pub steps: Option<usize>,
    /// Save a snapshot every this many steps (0: initial and final only).
    pub save_every: usize,
    pub vtk: bool,
    /// Omit wall-clock times from the outputs.
    pub reproducible: bool,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20240607;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshSource::Box {
                n: [4, 4, 4],
                domain: BoxDomain::unit(),
            },
            shape_cap: crate::mesh::MeshOptions::default().shape_cap,
            params: SchemeParams::default(),
            initial: InitialData::Gaussian {
                rho: 1.0,
                amplitude: 0.5,
                width: 0.2,
                center: None,
            },
            forcing: ForcingMode::Auto,
            case: CaseKind::Polynomial,
            steps: None,
            save_every: 1,
            vtk: false,
            reproducible: true,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Energy,
    Consistency,
    Mms,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(StudyKind::Energy),
            "consistency" => Ok(StudyKind::Consistency),
            "mms" | "mms-convergence" => Ok(StudyKind::Mms),
            _ => Err(Error::Config(format!("unknown study kind '{s}' (energy, consistency, mms)"))),
        }
    }
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Energy => "energy",
            StudyKind::Consistency => "consistency",
            StudyKind::Mms => "mms",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub base: RunConfig,
    pub kind: StudyKind,
    /// Cells per axis of each level, strictly increasing.
    pub levels: Vec<usize>,
    /// Adiabatic exponents of an energy sweep; empty means the base `γ`.
    pub gammas: Vec<f64>,
    /// Sub-box of the error norms.
    pub sub_box: Option<BoxDomain>,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(Error::Config("levels must be positive".into()));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("levels must be strictly increasing".into()));
        }
        if self.kind != StudyKind::Energy && self.levels.len() < 3 {
            return Err(Error::Config(format!(
                "{} study needs at least 3 levels, got {}",
                self.kind.name(),
                self.levels.len()
            )));
        }
        if !matches!(self.base.mesh, MeshSource::Box { .. }) {
            return Err(Error::Config("studies need a generated box mesh".into()));
        }
        Ok(())
    }
}

struct Entries {
    source: String,
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str, source: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    source_name: source.into(),
                    line: i + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = k.trim().to_string();
            if map.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    source_name: source.into(),
                    line: i + 1,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(Entries {
            source: source.into(),
            map,
        })
    }

    fn err(&self, line: usize, key: &str, msg: impl std::fmt::Display) -> Error {
        Error::Parse {
            source_name: self.source.clone(),
            line,
            message: format!("key '{key}': {msg}"),
        }
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| self.err(line, key, e)),
        }
    }

    fn take_list<T: FromStr>(&mut self, key: &str, len: Option<usize>) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, v)) = self.map.remove(key) else {
            return Ok(None);
        };
        let items = v
            .split_whitespace()
            .map(|s| s.parse::<T>().map_err(|e| self.err(line, key, e)))
            .collect::<Result<Vec<T>>>()?;
        if let Some(n) = len {
            if items.len() != n {
                return Err(self.err(line, key, format!("expected {n} values, got {}", items.len())));
            }
        }
        if items.is_empty() {
            return Err(self.err(line, key, "empty list"));
        }
        Ok(Some(items))
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, v)) => match v.as_str() {
                "true" | "yes" | "on" | "1" => Ok(Some(true)),
                "false" | "no" | "off" | "0" => Ok(Some(false)),
                _ => Err(self.err(line, key, format!("expected true or false, got '{v}'"))),
            },
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((k, (line, _))) = self.map.into_iter().next() {
            return Err(Error::Parse {
                source_name: self.source,
                line,
                message: format!("unknown key '{k}'"),
            });
        }
        Ok(())
    }
}

fn point(v: Vec<f64>) -> Point {
    Point::new(v[0], v[1], v[2])
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut e = Entries::parse(text, source)?;
        let cfg = Self::from_entries(&mut e)?;
        e.finish()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn from_entries(e: &mut Entries) -> Result<Self> {
        let mut c = RunConfig::default();
        let n = match e.take_list::<usize>("n", None)? {
            None => [4, 4, 4],
            Some(v) if v.len() == 1 => [v[0]; 3],
            Some(v) if v.len() == 3 => [v[0], v[1], v[2]],
            Some(_) => return Err(Error::Config("n takes 1 or 3 values".into())),
        };
        let domain = match e.take_list::<f64>("box", Some(3))? {
            Some(v) => BoxDomain::from_extents([v[0], v[1], v[2]]),
            None => BoxDomain::unit(),
        };
        c.mesh = match e.take::<String>("mesh")? {
            None => MeshSource::Box { n, domain },
            Some(s) if s == "box" => MeshSource::Box { n, domain },
            Some(path) => MeshSource::File(PathBuf::from(path)),
        };
        if let Some(v) = e.take("shape_cap")? {
            c.shape_cap = v;
        }

        let p = &mut c.params;
        macro_rules! set {
            ($($key:literal => $field:expr),* $(,)?) => {
                $(if let Some(v) = e.take($key)? { $field = v; })*
            };
        }
        set! {
            "a" => p.a,
            "gamma" => p.gamma,
            "mu" => p.mu,
            "eta" => p.eta,
            "c_t" => p.c_t,
            "t_end" => p.t_end,
            "tol_nonlinear" => p.tol_nonlinear,
            "max_iterations" => p.max_iterations,
            "direct_threshold" => p.direct_threshold,
            "gmres_tol" => p.gmres_tol,
            "gmres_restart" => p.gmres_restart,
        }
        p.alpha = match e.take("alpha")? {
            Some(v) => v,
            None => default_alpha(p.gamma),
        };
        p.dt = e.take("dt")?;
        let cfl: Option<f64> = e.take("cfl")?;
        p.dt_rule = match e.take::<String>("dt_rule")?.as_deref() {
            None | Some("fixed") => DtRule::Fixed,
            Some("cfl") => DtRule::Cfl(cfl.unwrap_or(0.5)),
            Some(other) => return Err(Error::Config(format!("unknown dt_rule '{other}' (fixed, cfl)"))),
        };
        p.linear_solver = match e.take::<String>("linear_solver")?.as_deref() {
            None | Some("auto") => LinearSolverKind::Auto,
            Some("direct") => LinearSolverKind::Direct,
            Some("gmres") => LinearSolverKind::Gmres,
            Some(other) => return Err(Error::Config(format!("unknown linear_solver '{other}' (auto, direct, gmres)"))),
        };

        c.steps = e.take("steps")?;
        if let Some(v) = e.take("save_every")? {
            c.save_every = v;
        }
        if let Some(v) = e.take_bool("vtk")? {
            c.vtk = v;
        }
        if let Some(v) = e.take_bool("reproducible")? {
            c.reproducible = v;
        }
        if let Some(v) = e.take("seed")? {
            c.seed = v;
        }
        if let Some(v) = e.take::<String>("case")? {
            c.case = v.parse()?;
        }
        c.forcing = match e.take::<String>("forcing")?.as_deref() {
            None | Some("auto") => ForcingMode::Auto,
            Some("on") | Some("true") => ForcingMode::On,
            Some("off") | Some("false") => ForcingMode::Off,
            Some(other) => return Err(Error::Config(format!("unknown forcing '{other}' (auto, on, off)"))),
        };

        let rho: f64 = e.take("rho0")?.unwrap_or(1.0);
        let amplitude: Option<f64> = e.take("amplitude")?;
        let width: f64 = e.take("width")?.unwrap_or(0.2);
        let center = e.take_list::<f64>("center", Some(3))?.map(point);
        let velocity: f64 = e.take("velocity_amplitude")?.unwrap_or(0.1);
        c.initial = match e.take::<String>("initial")?.as_deref() {
            None | Some("gaussian") => InitialData::Gaussian {
                rho,
                amplitude: amplitude.unwrap_or(0.5),
                width,
                center,
            },
            Some("constant") => InitialData::Constant { rho },
            Some("random") => InitialData::Random {
                rho,
                amplitude: amplitude.unwrap_or(0.1),
                velocity,
            },
            Some("manufactured") => InitialData::Manufactured(c.case),
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown initial '{other}' (constant, gaussian, random, manufactured)"
                )))
            }
        };
        c.params.validate()?;
        if c.shape_cap < 1.0 {
            return Err(Error::Config(format!("shape_cap must be at least 1, got {}", c.shape_cap)));
        }
        if let MeshSource::Box { n, .. } = c.mesh {
            if n.contains(&0) {
                return Err(Error::Config("n must be positive".into()));
            }
        }
        Ok(c)
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        match &self.mesh {
            MeshSource::Box { n, domain } => {
                let l = domain.lengths();
                let _ = writeln!(s, "mesh = box\nn = {} {} {}\nbox = {:?} {:?} {:?}", n[0], n[1], n[2], l.x, l.y, l.z);
            }
            MeshSource::File(path) => {
                let _ = writeln!(s, "mesh = {}", path.display());
            }
        }
        let _ = writeln!(s, "shape_cap = {:?}", self.shape_cap);
        let _ = writeln!(
            s,
            "a = {:?}\ngamma = {:?}\nmu = {:?}\neta = {:?}\nalpha = {:?}\nc_t = {:?}\nt_end = {:?}",
            p.a, p.gamma, p.mu, p.eta, p.alpha, p.c_t, p.t_end
        );
        if let Some(dt) = p.dt {
            let _ = writeln!(s, "dt = {dt:?}");
        }
        match p.dt_rule {
            DtRule::Fixed => s.push_str("dt_rule = fixed\n"),
            DtRule::Cfl(c) => {
                let _ = writeln!(s, "dt_rule = cfl\ncfl = {c:?}");
            }
        }
        let solver = match p.linear_solver {
            LinearSolverKind::Auto => "auto",
            LinearSolverKind::Direct => "direct",
            LinearSolverKind::Gmres => "gmres",
        };
        let _ = writeln!(
            s,
            "tol_nonlinear = {:?}\nmax_iterations = {}\nlinear_solver = {solver}\ndirect_threshold = {}\ngmres_tol = {:?}\ngmres_restart = {}",
            p.tol_nonlinear, p.max_iterations, p.direct_threshold, p.gmres_tol, p.gmres_restart
        );
        if let Some(n) = self.steps {
            let _ = writeln!(s, "steps = {n}");
        }
        let forcing = match self.forcing {
            ForcingMode::Auto => "auto",
            ForcingMode::On => "on",
            ForcingMode::Off => "off",
        };
        let _ = writeln!(
            s,
            "save_every = {}\nvtk = {}\nreproducible = {}\nseed = {}\ncase = {}\nforcing = {forcing}",
            self.save_every, self.vtk, self.reproducible, self.seed, self.case
        );
        match &self.initial {
            InitialData::Constant { rho } => {
                let _ = writeln!(s, "initial = constant\nrho0 = {rho:?}");
            }
            InitialData::Gaussian {
                rho,
                amplitude,
                width,
                center,
            } => {
                let _ = writeln!(s, "initial = gaussian\nrho0 = {rho:?}\namplitude = {amplitude:?}\nwidth = {width:?}");
                if let Some(c) = center {
                    let _ = writeln!(s, "center = {:?} {:?} {:?}", c.x, c.y, c.z);
                }
            }
            InitialData::Random {
                rho,
                amplitude,
                velocity,
            } => {
                let _ = writeln!(
                    s,
                    "initial = random\nrho0 = {rho:?}\namplitude = {amplitude:?}\nvelocity_amplitude = {velocity:?}"
                );
            }
            InitialData::Manufactured(_) => s.push_str("initial = manufactured\n"),
        }
        s
    }
}

impl StudyConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut e = Entries::parse(text, source)?;
        let kind: StudyKind = match e.take::<String>("kind")? {
            Some(k) => k.parse()?,
            None => return Err(Error::Config("study config needs 'kind'".into())),
        };
        let levels = e.take_list::<usize>("levels", None)?.unwrap_or_else(|| vec![4, 8, 16]);
        let gammas = e.take_list::<f64>("gammas", None)?.unwrap_or_default();
        let sub_box = e
            .take_list::<f64>("sub_box", Some(6))?
            .map(|v| BoxDomain::new(Point::new(v[0], v[1], v[2]), Point::new(v[3], v[4], v[5])));
        let base = RunConfig::from_entries(&mut e)?;
        e.finish()?;
        let cfg = StudyConfig {
            base,
            kind,
            levels,
            gammas,
            sub_box,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}
