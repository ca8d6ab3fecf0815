//! Manufactured solutions with the momentum source that makes them exact.
//!
//! Each case satisfies the continuity equation exactly and vanishes on the
//! boundary of its box; the momentum source
//!
//! ```text
//! f_i = ∂_t(ρ u_i) + Σ_j ∂_j(ρ u_i u_j) + ∂_i p - μ Δu_i - (μ/3 + η) ∂_i div u
//! ```
//!
//! is evaluated with second-order forward-mode automatic differentiation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, SVector, Vector3, Vector4};
use num_dual::{hessian, Dual2SVec64, DualNum};

use crate::diagnostics::Reference;
use crate::mesh::{BoxDomain, Point};
use crate::scheme::{Forcing, SchemeParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// `ρ = 1 - ε sin t div w`, `ρ u = ε cos t w` for a bubble field `w`.
    Acoustic,
    /// Axisymmetric density bump with a swirling velocity around it, cut
    /// off (`C³`) at the inscribed cylinder.
    RotatingBump,
    /// `ρ = 1 + 0.1 sin(π z)` with a polynomial stream-function velocity in
    /// horizontal planes.
    Polynomial,
}

impl CaseKind {
    pub const ALL: [CaseKind; 3] = [CaseKind::Acoustic, CaseKind::RotatingBump, CaseKind::Polynomial];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Acoustic => "acoustic",
            CaseKind::RotatingBump => "rotating-bump",
            CaseKind::Polynomial => "polynomial",
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown manufactured case '{s}' (acoustic, rotating-bump, polynomial)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub domain: BoxDomain,
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    pub eta: f64,
}

const ACOUSTIC_EPS: f64 = 0.1;
const POLY_U0: f64 = 40.0;
const BUMP_SIGMA: f64 = 0.15;

impl ManufacturedCase {
    pub fn new(kind: CaseKind, domain: BoxDomain, params: &SchemeParams) -> Self {
        ManufacturedCase {
            kind,
            domain,
            a: params.a,
            gamma: params.gamma,
            mu: params.mu,
            eta: params.eta,
        }
    }

    /// Density and velocity at `(t, x)` for any dual-number type.
    fn fields<D: DualNum<Primitive = f64>>(&self, t: D, x: [D; 3]) -> (D, [D; 3]) {
        let lo = self.domain.min;
        let len = self.domain.lengths();
        let xi: [D; 3] = [0, 1, 2].map(|d| (x[d].clone() - lo[d]) / len[d]);
        match self.kind {
            CaseKind::Acoustic => {
                // b = Π sin²(π ξ_d), w = b (1, 1, 1).
                let s: [D; 3] = xi.clone().map(|v| (v * PI).sin());
                let c: [D; 3] = xi.map(|v| (v * PI).cos());
                let sq: [D; 3] = s.clone().map(|v| v.clone() * v);
                let b = sq[0].clone() * sq[1].clone() * sq[2].clone();
                let mut div = D::from(0.0);
                for d in 0..3 {
                    let mut term = s[d].clone() * c[d].clone() * (2.0 * PI / len[d]);
                    for e in 0..3 {
                        if e != d {
                            term *= sq[e].clone();
                        }
                    }
                    div += term;
                }
                let rho = D::from(1.0) - t.sin() * div * ACOUSTIC_EPS;
                let u = t.cos() * b * ACOUSTIC_EPS / rho.clone();
                (rho, [u.clone(), u.clone(), u])
            }
            CaseKind::RotatingBump => {
                let c = self.domain.min + len * 0.5;
                let dx = x[0].clone() - c[0];
                let dy = x[1].clone() - c[1];
                let dz = x[2].clone() - c[2];
                let r2 = dx.clone() * dx.clone() + dy.clone() * dy.clone();
                let rho = D::from(1.0)
                    + ((r2.clone() + dz.clone() * dz) * (-0.5 / (BUMP_SIGMA * BUMP_SIGMA))).exp() * 0.5;
                let big_r = 0.5 * len[0].min(len[1]);
                let q = D::from(1.0) - r2 / (big_r * big_r);
                let cut = if q.re() > 0.0 { q.powi(4) } else { D::from(0.0) };
                let omega = (t * (2.0 * PI)).sin() * 0.5 + 1.0;
                let w = omega * cut * (xi[2].clone() * PI).sin();
                (rho, [-(w.clone() * dy), w * dx, D::from(0.0)])
            }
            CaseKind::Polynomial => {
                let p = |v: &D| v.clone() * v.clone() * (D::from(1.0) - v.clone()).powi(2);
                let dp = |v: &D, l: f64| v.clone() * (D::from(1.0) - v.clone()) * (D::from(1.0) - v.clone() * 2.0) * (2.0 / l);
                let qz = xi[2].clone() * (D::from(1.0) - xi[2].clone());
                let amp = t.cos() * POLY_U0 * qz;
                let rho = D::from(1.0) + (xi[2].clone() * PI).sin() * 0.1;
                let ux = amp.clone() * p(&xi[0]) * dp(&xi[1], len[1]);
                let uy = -(amp * dp(&xi[0], len[0]) * p(&xi[1]));
                (rho, [ux, uy, D::from(0.0)])
            }
        }
    }

    pub fn density(&self, t: f64, x: &Point) -> f64 {
        self.fields(t, [x.x, x.y, x.z]).0
    }

    pub fn velocity(&self, t: f64, x: &Point) -> Vector3<f64> {
        Vector3::from(self.fields(t, [x.x, x.y, x.z]).1)
    }

    /// Value, gradient and Hessian in `(t, x, y, z)` of `ρ` (index 0) and
    /// the velocity components (1..=3).
    fn jets(&self, t: f64, x: &Point) -> [(f64, Vector4<f64>, Matrix4<f64>); 4] {
        let at = SVector::from([t, x.x, x.y, x.z]);
        [0, 1, 2, 3].map(|k| {
            hessian(
                |v: SVector<Dual2SVec64<4>, 4>| {
                    let (rho, u) = self.fields(v[0], [v[1], v[2], v[3]]);
                    if k == 0 {
                        rho
                    } else {
                        u[k - 1]
                    }
                },
                &at,
            )
        })
    }

    /// Momentum source at `(t, x)`.
    pub fn forcing(&self, t: f64, x: &Point) -> Vector3<f64> {
        let j = self.jets(t, x);
        let (rho, g_rho) = (j[0].0, j[0].1);
        let lam = self.mu / 3.0 + self.eta;
        let dp = self.a * self.gamma * rho.powf(self.gamma - 1.0);
        Vector3::from_fn(|i, _| {
            let (ui, gi, hi) = (j[i + 1].0, j[i + 1].1, j[i + 1].2);
            let mut f = g_rho[0] * ui + rho * gi[0];
            for jj in 0..3 {
                let (uj, gj) = (j[jj + 1].0, j[jj + 1].1);
                f += g_rho[jj + 1] * ui * uj + rho * gi[jj + 1] * uj + rho * ui * gj[jj + 1];
                f -= self.mu * hi[(jj + 1, jj + 1)];
                f -= lam * j[jj + 1].2[(i + 1, jj + 1)];
            }
            f + dp * g_rho[i + 1]
        })
    }

    /// `∂_t ρ + div(ρ u)`, zero by construction.
    pub fn continuity_residual(&self, t: f64, x: &Point) -> f64 {
        let j = self.jets(t, x);
        let rho = j[0].0;
        let mut r = j[0].1[0];
        for d in 0..3 {
            r += j[0].1[d + 1] * j[d + 1].0 + rho * j[d + 1].1[d + 1];
        }
        r
    }
}

impl Reference for ManufacturedCase {
    fn density(&self, t: f64, x: &Point) -> f64 {
        ManufacturedCase::density(self, t, x)
    }

    fn velocity(&self, t: f64, x: &Point) -> Vector3<f64> {
        ManufacturedCase::velocity(self, t, x)
    }
}

impl Forcing for ManufacturedCase {
    fn momentum_source(&self, t: f64, x: &Point) -> Vector3<f64> {
        self.forcing(t, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cases() -> Vec<ManufacturedCase> {
        let p = SchemeParams {
            mu: 0.3,
            eta: 0.2,
            ..Default::default()
        };
        let mut v = Vec::new();
        for dom in [BoxDomain::unit(), BoxDomain::new(Point::new(-1.0, 0.0, 0.5), Point::new(0.5, 2.0, 1.5))] {
            for k in CaseKind::ALL {
                v.push(ManufacturedCase::new(k, dom, &p));
            }
        }
        v
    }

    fn sample(rng: &mut ChaCha8Rng, d: &BoxDomain) -> Point {
        Point::from_fn(|i, _| rng.gen_range(d.min[i]..d.max[i]))
    }

    /// The swirl is only `C³` across its cutoff cylinder, where the
    /// difference stencils lose their order.
    fn near_cutoff(case: &ManufacturedCase, x: &Point) -> bool {
        let len = case.domain.lengths();
        let c = case.domain.min + len * 0.5;
        let r = ((x.x - c.x).powi(2) + (x.y - c.y).powi(2)).sqrt();
        (r - 0.5 * len.x.min(len.y)).abs() < 0.01
    }

    /// Fourth-order central differences of `g` in direction `e`.
    fn d1(g: &dyn Fn(f64, Point) -> f64, t: f64, x: Point, e: Vector4<f64>, h: f64) -> f64 {
        let at = |s: f64| g(t + s * e[0], x + Vector3::new(e[1], e[2], e[3]) * s);
        (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
    }

    fn d2(g: &dyn Fn(f64, Point) -> f64, t: f64, x: Point, a: usize, b: usize, h: f64) -> f64 {
        let ea = Vector4::from_fn(|i, _| if i == a { 1.0 } else { 0.0 });
        let inner = move |s: f64, y: Point| {
            let eb = Vector4::from_fn(|i, _| if i == b { 1.0 } else { 0.0 });
            d1(g, s, y, eb, h)
        };
        d1(&inner, t, x, ea, h)
    }

    #[test]
    fn forcing_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in cases() {
            for _ in 0..8 {
                let x = sample(&mut rng, &case.domain);
                if case.kind == CaseKind::RotatingBump && near_cutoff(&case, &x) {
                    continue;
                }
                let t = rng.gen_range(0.0..1.0);
                let rho = |t: f64, y: Point| case.density(t, &y);
                let comp = |i: usize| move |t: f64, y: Point| case.velocity(t, &y)[i];
                let mom = |i: usize| move |t: f64, y: Point| case.density(t, &y) * case.velocity(t, &y)[i];
                let flux = |i: usize, j: usize| {
                    move |t: f64, y: Point| {
                        let u = case.velocity(t, &y);
                        case.density(t, &y) * u[i] * u[j]
                    }
                };
                let unit = |k: usize| Vector4::from_fn(|i, _| if i == k { 1.0 } else { 0.0 });
                let f = case.forcing(t, &x);
                let lam = case.mu / 3.0 + case.eta;
                let p = |t: f64, y: Point| case.a * rho(t, y).powf(case.gamma);
                let fd_at = |i: usize, h: f64| {
                    let mut fd = d1(&mom(i), t, x, unit(0), h) + d1(&p, t, x, unit(i + 1), h);
                    for j in 0..3 {
                        fd += d1(&flux(i, j), t, x, unit(j + 1), h);
                        fd -= case.mu * d2(&comp(i), t, x, j + 1, j + 1, h);
                        fd -= lam * d2(&comp(j), t, x, i + 1, j + 1, h);
                    }
                    fd
                };
                for i in 0..3 {
                    // Richardson extrapolation of the fourth-order stencils.
                    let fd = (16.0 * fd_at(i, 5e-4) - fd_at(i, 1e-3)) / 15.0;
                    assert!((fd - f[i]).abs() <= 1e-8 * (1.0 + f[i].abs()), "{:?} {fd} {}", case.kind, f[i]);
                }
            }
        }
    }

    #[test]
    fn continuity_holds_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in cases() {
            for _ in 0..20 {
                let x = sample(&mut rng, &case.domain);
                let r = case.continuity_residual(rng.gen_range(0.0..2.0), &x);
                assert!(r.abs() < 1e-12, "{:?} {r}", case.kind);
            }
        }
    }

    #[test]
    fn velocity_vanishes_on_the_boundary_and_density_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for case in cases() {
            let d = case.domain;
            for _ in 0..50 {
                let mut x = sample(&mut rng, &d);
                let axis = rng.gen_range(0..3);
                x[axis] = if rng.gen_bool(0.5) { d.min[axis] } else { d.max[axis] };
                let t = rng.gen_range(0.0..2.0);
                assert!(case.velocity(t, &x).norm() < 1e-14, "{:?}", case.kind);
                assert!(case.density(t, &sample(&mut rng, &d)) > 0.5);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for k in CaseKind::ALL {
            assert_eq!(k.name().parse::<CaseKind>().unwrap(), k);
        }
        assert!("vortex".parse::<CaseKind>().is_err());
    }
}
