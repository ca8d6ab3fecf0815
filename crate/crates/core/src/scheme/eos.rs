//! Isentropic pressure law `p = a ρ^γ` and its potential.

use super::SchemeParams;
use crate::{Error, Result};

fn check(rho: f64) -> Result<()> {
    if rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("density must be nonnegative, got {rho}")))
    }
}

pub fn pressure(rho: f64, params: &SchemeParams) -> Result<f64> {
    check(rho)?;
    Ok(params.a * rho.powf(params.gamma))
}

/// `P(ρ) = a ρ^γ / (γ - 1)`.
pub fn pressure_potential(rho: f64, params: &SchemeParams) -> Result<f64> {
    check(rho)?;
    Ok(params.a * rho.powf(params.gamma) / (params.gamma - 1.0))
}

/// `P''(ρ) = a γ ρ^{γ-2}`, undefined at `ρ = 0` for `γ < 2`.
pub fn pressure_potential_second(rho: f64, params: &SchemeParams) -> Result<f64> {
    check(rho)?;
    if rho == 0.0 && params.gamma < 2.0 {
        return Err(Error::Domain("P'' is singular at zero density".into()));
    }
    Ok(params.a * params.gamma * rho.powf(params.gamma - 2.0))
}

/// Unchecked `p(ρ)` and `p'(ρ)` for the assembly loops.
#[inline]
pub(crate) fn pressure_and_derivative(rho: f64, a: f64, gamma: f64) -> (f64, f64) {
    let pm1 = rho.powf(gamma - 1.0);
    (a * pm1 * rho, a * gamma * pm1)
}

/// Hat function `χ(z) = max(0, 1 - |z|)`.
#[inline]
pub fn chi(z: f64) -> f64 {
    if z < -1.0 {
        0.0
    } else if z <= 0.0 {
        z + 1.0
    } else if z <= 1.0 {
        1.0 - z
    } else {
        0.0
    }
}
