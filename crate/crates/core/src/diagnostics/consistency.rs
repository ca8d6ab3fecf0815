//! Consistency residuals of a computed trajectory in the weak formulation.
//!
//! With `ρ_h`, `u_h` piecewise constant in time (state `k` on
//! `[t_k, t_{k+1})`), the continuity residual of a test function `φ` is
//!
//! ```text
//! R_c = | ∫ ρ⁰ φ(0) + ∫₀^T ∫ ρ_h ∂_t φ + ρ_h u_h·∇φ |
//! ```
//!
//! and the momentum residual
//!
//! ```text
//! R_m = | ∫ ρ⁰⟨u⁰⟩·φ(0) + ∫₀^T ∫ ρ_h⟨u_h⟩·∂_t φ + ρ_h⟨u_h⟩⊗u_h : ∇φ + p(ρ_h) div φ
//!         - μ ∇_h u_h : ∇φ - (μ/3 + η) div_h u_h div φ + f·φ |
//! ```
//!
//! Test functions are separable, `φ = ψ(t) s(x) d`, so the time integrals
//! are exact sums over steps; space integrals use the degree-2 cell rule.

use nalgebra::Vector3;

use super::fit::{fit_power_law, PowerFit};
use crate::mesh::quadrature::{gauss_legendre, tet_degree2};
use crate::mesh::{BoxDomain, Mesh, Point};
use crate::scheme::{pressure_and_derivative, SchemeParams, State, Trajectory};
use crate::{Error, Result};

/// `φ(t, x) = amplitude ψ(t) s(x) direction` with
/// `ψ(t) = (1 - t/T_s)⁴` on `[0, T_s)` and zero after, and
/// `s(x) = (1 + tilt·(ξ - ½)) Π_i sin²(m_i π ξ_i)` in box coordinates
/// `ξ ∈ [0, 1]³`.
///
/// `s` vanishes with its gradient on the box boundary. A nonzero tilt
/// breaks the mirror symmetries of the box, under which residuals of
/// symmetric data would vanish identically.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub amplitude: f64,
    pub t_support: f64,
    pub modes: [u32; 3],
    pub direction: Vector3<f64>,
    pub tilt: Vector3<f64>,
    pub domain: BoxDomain,
}

impl TestFunction {
    pub fn time(&self, t: f64) -> f64 {
        if t >= self.t_support {
            0.0
        } else {
            (1.0 - t / self.t_support).powi(4)
        }
    }

    /// `∫_a^b ψ`.
    pub fn time_integral(&self, a: f64, b: f64) -> f64 {
        let anti = |t: f64| {
            let t = t.min(self.t_support);
            -self.t_support / 5.0 * (1.0 - t / self.t_support).powi(5)
        };
        anti(b) - anti(a)
    }

    /// `s(x)` and `∇s(x)`, scaled by the amplitude.
    pub fn space(&self, x: &Point) -> (f64, Vector3<f64>) {
        let len = self.domain.lengths();
        let mut sin = [0.0; 3];
        let mut dsin = [0.0; 3];
        let mut lin = 1.0;
        for d in 0..3 {
            let k = self.modes[d] as f64 * std::f64::consts::PI;
            let xi = (x[d] - self.domain.min[d]) / len[d];
            let (s, c) = (k * xi).sin_cos();
            sin[d] = s * s;
            dsin[d] = 2.0 * s * c * k / len[d];
            lin += self.tilt[d] * (xi - 0.5);
        }
        let prod = sin[0] * sin[1] * sin[2];
        let grad = Vector3::new(dsin[0] * sin[1] * sin[2], sin[0] * dsin[1] * sin[2], sin[0] * sin[1] * dsin[2]) * lin
            + Vector3::new(self.tilt[0] / len[0], self.tilt[1] / len[1], self.tilt[2] / len[2]) * prod;
        (self.amplitude * lin * prod, grad * self.amplitude)
    }
}

/// Five test functions with distinct spatial modes, directions, tilts and
/// time supports inside `(0, t_end]`.
pub fn standard_test_functions(domain: &BoxDomain, t_end: f64) -> Vec<TestFunction> {
    let s = 1.0 / 3f64.sqrt();
    let r = 1.0 / 2f64.sqrt();
    [
        ([1, 1, 1], Vector3::new(1.0, 0.0, 0.0), [0.4, -0.2, 0.1], 1.0),
        ([2, 1, 1], Vector3::new(0.0, 1.0, 0.0), [-0.1, 0.4, 0.2], 0.9),
        ([1, 2, 1], Vector3::new(0.0, 0.0, 1.0), [0.2, 0.1, -0.4], 0.8),
        ([1, 1, 2], Vector3::new(s, s, s), [-0.3, -0.3, 0.2], 0.7),
        ([2, 2, 1], Vector3::new(r, -r, 0.0), [0.3, 0.2, 0.3], 0.6),
    ]
    .into_iter()
    .map(|(modes, direction, tilt, frac)| TestFunction {
        amplitude: 1.0,
        t_support: frac * t_end,
        modes,
        direction,
        tilt: Vector3::from(tilt),
        domain: *domain,
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyLevel {
    pub h: f64,
    /// Per test function.
    pub continuity: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl ConsistencyLevel {
    /// Sum over the test-function family.
    pub fn total_continuity(&self) -> f64 {
        self.continuity.iter().sum()
    }

    pub fn total_momentum(&self) -> f64 {
        self.momentum.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub levels: Vec<ConsistencyLevel>,
    /// Fits of the family totals; `None` when some total is exactly zero.
    pub beta_c: Option<PowerFit>,
    pub beta_m: Option<PowerFit>,
}

/// Per-cell quadrature data of one test function's spatial profile.
struct Profile {
    /// `∫_E s`.
    s: Vec<f64>,
    /// `∫_E ∇s`.
    grad: Vec<Vector3<f64>>,
    /// `(w, λ, ∇s)` at the quadrature points of every cell.
    points: Vec<[(f64, [f64; 4], Vector3<f64>); 4]>,
}

fn profile(mesh: &Mesh, tf: &TestFunction) -> Profile {
    let rule = tet_degree2();
    let nc = mesh.num_cells();
    let mut p = Profile {
        s: vec![0.0; nc],
        grad: vec![Vector3::zeros(); nc],
        points: Vec::with_capacity(nc),
    };
    for c in 0..nc {
        let v = mesh.cell_vertices(c);
        let vol = mesh.geometry(c).volume;
        let mut pts = [(0.0, [0.0; 4], Vector3::zeros()); 4];
        for (q, (b, w)) in rule.bary.iter().zip(&rule.weights).enumerate() {
            let x = v[0] * b[0] + v[1] * b[1] + v[2] * b[2] + v[3] * b[3];
            let (s, g) = tf.space(&x);
            let w = w * vol;
            p.s[c] += w * s;
            p.grad[c] += g * w;
            pts[q] = (w, *b, g);
        }
        p.points.push(pts);
    }
    p
}

/// Residuals of one trajectory against every test function.
pub fn consistency_level(
    mesh: &Mesh,
    traj: &Trajectory,
    tests: &[TestFunction],
    params: &SchemeParams,
) -> Result<ConsistencyLevel> {
    for s in &traj.states {
        s.check_mesh(mesh).map_err(|e| Error::MeshMismatch(e.to_string()))?;
    }
    let t_end = traj.last().t;
    if let Some(tf) = tests.iter().find(|tf| tf.t_support > t_end * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!(
            "test function support {} extends past the trajectory end {t_end}",
            tf.t_support
        )));
    }
    let mut level = ConsistencyLevel {
        h: mesh.h(),
        continuity: Vec::with_capacity(tests.len()),
        momentum: Vec::with_capacity(tests.len()),
    };
    let cells = CellData::new(mesh, traj, params);
    for tf in tests {
        let prof = profile(mesh, tf);
        let (rc, rm) = residuals(mesh, traj, &cells, &prof, tf, params);
        level.continuity.push(rc);
        level.momentum.push(rm);
    }
    Ok(level)
}

/// Cell averages, gradients and pressures of every state.
struct CellData {
    avg: Vec<Vec<Vector3<f64>>>,
    grad: Vec<Vec<nalgebra::Matrix3<f64>>>,
    pressure: Vec<Vec<f64>>,
}

impl CellData {
    fn new(mesh: &Mesh, traj: &Trajectory, params: &SchemeParams) -> Self {
        let nc = mesh.num_cells();
        let per_state = |s: &State| {
            let avg = (0..nc).map(|c| s.u.cell_average(mesh, c)).collect();
            let grad = (0..nc).map(|c| s.u.gradient(mesh, c)).collect();
            let p = (0..nc)
                .map(|c| pressure_and_derivative(s.rho[c], params.a, params.gamma).0)
                .collect();
            (avg, grad, p)
        };
        let mut d = CellData {
            avg: vec![],
            grad: vec![],
            pressure: vec![],
        };
        for s in &traj.states {
            let (a, g, p) = per_state(s);
            d.avg.push(a);
            d.grad.push(g);
            d.pressure.push(p);
        }
        d
    }
}

fn residuals(
    mesh: &Mesh,
    traj: &Trajectory,
    cells: &CellData,
    prof: &Profile,
    tf: &TestFunction,
    params: &SchemeParams,
) -> (f64, f64) {
    let dir = tf.direction;
    let lam = params.mu / 3.0 + params.eta;
    let nc = mesh.num_cells();
    let s0 = &traj.states[0];
    let mut rc = tf.time(0.0) * (0..nc).map(|c| s0.rho[c] * prof.s[c]).sum::<f64>();
    let mut rm = tf.time(0.0) * (0..nc).map(|c| s0.rho[c] * cells.avg[0][c].dot(&dir) * prof.s[c]).sum::<f64>();

    let (gx, gw) = gauss_legendre(3);
    for (k, state) in traj.states.iter().enumerate() {
        let t0 = state.t;
        let t1 = traj.states.get(k + 1).map_or(f64::INFINITY, |s| s.t);
        let dpsi = tf.time(t1) - tf.time(t0);
        let ipsi = tf.time_integral(t0, t1.min(tf.t_support.max(t0)));
        if dpsi == 0.0 && ipsi == 0.0 {
            continue;
        }
        let (avg, grad, pres) = (&cells.avg[k], &cells.grad[k], &cells.pressure[k]);
        let mut cont = 0.0;
        let mut mom_dt = 0.0;
        let mut mom = 0.0;
        for c in 0..nc {
            let rho = state.rho[c];
            cont += dpsi * rho * prof.s[c];
            mom_dt += dpsi * rho * avg[c].dot(&dir) * prof.s[c];
            if ipsi == 0.0 {
                continue;
            }
            let mut transport = 0.0;
            for &(w, b, g) in &prof.points[c] {
                transport += w * state.u.eval_bary(mesh, c, &b).dot(&g);
            }
            let gs = prof.grad[c];
            let g = grad[c];
            cont += ipsi * rho * transport;
            mom += ipsi
                * (rho * avg[c].dot(&dir) * transport + pres[c] * dir.dot(&gs)
                    - params.mu * dir.dot(&(g * gs))
                    - lam * g.trace() * dir.dot(&gs));
        }
        rc += cont;
        rm += mom_dt + mom;

        if let (Some(f), true) = (&params.forcing, t1.is_finite()) {
            let rule = tet_degree2();
            let mut work = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                let t = t0 + x * (t1 - t0);
                let psi = tf.time(t);
                if psi == 0.0 {
                    continue;
                }
                for c in 0..nc {
                    let v = mesh.cell_vertices(c);
                    let vol = mesh.geometry(c).volume;
                    for (b, wq) in rule.bary.iter().zip(&rule.weights) {
                        let xq = v[0] * b[0] + v[1] * b[1] + v[2] * b[2] + v[3] * b[3];
                        let (s, _) = tf.space(&xq);
                        work += w * (t1 - t0) * psi * wq * vol * s * f.momentum_source(t, &xq).dot(&dir);
                    }
                }
            }
            rm += work;
        }
    }
    (rc.abs(), rm.abs())
}

/// Residuals on every level and power-law fits of the family totals.
pub fn consistency_residuals(
    levels: &[(&Mesh, &Trajectory)],
    tests: &[TestFunction],
    params: &SchemeParams,
) -> Result<ConsistencyReport> {
    if levels.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "consistency fit needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    let levels = levels
        .iter()
        .map(|(m, t)| consistency_level(m, t, tests, params))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let c: Vec<f64> = levels.iter().map(|l| l.total_continuity()).collect();
    let m: Vec<f64> = levels.iter().map(|l| l.total_momentum()).collect();
    Ok(ConsistencyReport {
        beta_c: fit_power_law(&h, &c).ok(),
        beta_m: fit_power_law(&h, &m).ok(),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_box_mesh;

    fn constant_trajectory(mesh: &Mesh, dt: f64, steps: usize) -> Trajectory {
        let mut traj = Trajectory::new(State::constant(mesh, 1.0));
        for k in 1..=steps {
            let mut s = State::constant(mesh, 1.0);
            s.t = k as f64 * dt;
            s.k = k;
            traj.states.push(s);
        }
        traj
    }

    #[test]
    fn time_integral_matches_quadrature() {
        let tf = standard_test_functions(&BoxDomain::unit(), 1.0).remove(1);
        let (x, w) = gauss_legendre(8);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * 0.3 * tf.time(0.2 + 0.3 * x)).sum();
        assert!((tf.time_integral(0.2, 0.5) - q).abs() < 1e-14);
        assert_eq!(tf.time_integral(0.95, 2.0), 0.0);
    }

    #[test]
    fn gradient_matches_differences() {
        let tf = standard_test_functions(&BoxDomain::from_extents([1.0, 2.0, 0.5]), 1.0).remove(4);
        let x = Point::new(0.3, 0.7, 0.1);
        let (_, g) = tf.space(&x);
        for d in 0..3 {
            let mut e = Vector3::zeros();
            e[d] = 1e-6;
            let fd = (tf.space(&(x + e)).0 - tf.space(&(x - e)).0) / 2e-6;
            assert!((fd - g[d]).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_test_function_gives_zero_residuals() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let traj = constant_trajectory(&mesh, 0.1, 10);
        let mut tests = standard_test_functions(&BoxDomain::unit(), 1.0);
        tests.iter_mut().for_each(|t| t.amplitude = 0.0);
        let level = consistency_level(&mesh, &traj, &tests, &SchemeParams::default()).unwrap();
        assert!(level.continuity.iter().chain(&level.momentum).all(|&r| r == 0.0));
    }

    #[test]
    fn constant_state_residual_is_time_sum_error() {
        // For ρ ≡ 1, u ≡ 0 only the time terms survive:
        // R_c = |∫s| |ψ(0) + Σ_k (ψ(t_{k+1}) - ψ(t_k))| = 0 exactly, since
        // the differences telescope.
        let mesh = build_box_mesh(&BoxDomain::unit(), [2, 2, 2]).unwrap();
        let traj = constant_trajectory(&mesh, 0.1, 10);
        let tests = standard_test_functions(&BoxDomain::unit(), 1.0);
        let level = consistency_level(&mesh, &traj, &tests, &SchemeParams::default()).unwrap();
        assert!(level.continuity.iter().all(|&r| r < 1e-15));
    }

    #[test]
    fn support_past_the_end_is_rejected() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let traj = constant_trajectory(&mesh, 0.1, 5);
        let tests = standard_test_functions(&BoxDomain::unit(), 1.0);
        assert!(consistency_level(&mesh, &traj, &tests, &SchemeParams::default()).is_err());
    }

    #[test]
    fn fewer_than_three_levels_is_an_error() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let traj = constant_trajectory(&mesh, 0.1, 10);
        let tests = standard_test_functions(&BoxDomain::unit(), 1.0);
        let r = consistency_residuals(&[(&mesh, &traj), (&mesh, &traj)], &tests, &SchemeParams::default());
        assert!(r.is_err());
    }
}
