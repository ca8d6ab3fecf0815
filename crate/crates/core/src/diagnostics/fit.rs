//! Least-squares fits of `log y` against `log h`.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    /// Exponent `β` in `y ≈ C h^β`.
    pub order: f64,
    pub log_constant: f64,
    pub r_squared: f64,
}

/// Fits `y = C h^β` through at least three points with positive `h`, `y`.
pub fn fit_power_law(h: &[f64], y: &[f64]) -> Result<PowerFit> {
    if h.len() != y.len() {
        return Err(Error::InvalidInput("fit needs as many values as mesh sizes".into()));
    }
    if h.len() < 3 {
        return Err(Error::InvalidInput(format!("fit needs at least 3 levels, got {}", h.len())));
    }
    if h.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("fit needs positive finite values".into()));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("fit needs distinct mesh sizes".into()));
    }
    let order = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(PowerFit {
        order,
        log_constant: my - order * mx,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let y: Vec<f64> = h.iter().map(|h: &f64| 3.0 * h.powf(1.7)).collect();
        let f = fit_power_law(&h, &y).unwrap();
        assert!((f.order - 1.7).abs() < 1e-12);
        assert!((f.log_constant - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_two_levels() {
        assert!(fit_power_law(&[0.5, 0.25], &[1.0, 0.5]).is_err());
        assert!(fit_power_law(&[0.5, 0.25, 0.1], &[1.0, 0.0, 0.5]).is_err());
    }
}
