//! Log-log least squares.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    /// log of the coefficient: value ≈ e^intercept · n^slope.
    pub intercept: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn coefficient(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Ordinary least squares of log value on log n.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::Domain(format!("power-law fit needs >= 3 points, got {}", points.len())));
    }
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| !(n > 0.0) || !(v > 0.0)) {
        return Err(Error::Domain(format!("power-law fit needs positive data, got ({n}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) {
        return Err(Error::Numeric("power-law fit is rank deficient: all n are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok(PowerLawFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_data() {
        let pts: Vec<(f64, f64)> = [10.0f64, 100.0, 1000.0, 5000.0].iter().map(|&n| (n, 7.0 * n.powi(-3))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-12);
        assert!((fit.intercept - 7f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_power_law(&[(4.0, 1.0), (4.0, 2.0), (4.0, 3.0)]), Err(Error::Numeric(_))));
        assert!(matches!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)]), Err(Error::Domain(_))));
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }
}
