//! Standard normal distribution function and friends.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Φ(z), the standard normal CDF, through the complementary error function so that
/// the lower tail keeps full relative precision.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// log Φ(z). Switches to the asymptotic tail series where erfc underflows.
pub fn log_normal_cdf(z: f64) -> f64 {
    if z > -30.0 {
        return normal_cdf(z).ln();
    }
    let z2 = z * z;
    // Φ(z) ~ φ(z)/|z| · (1 - 1/z² + 3/z⁴ - 15/z⁶)
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - 0.5 * (2.0 * PI).ln() - (-z).ln() + series.ln()
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}
