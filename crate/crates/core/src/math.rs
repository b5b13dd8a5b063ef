//! Small numerical helpers shared across modules.

use core::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// CDF of `N(mean, std^2)`.
pub fn normal_cdf_with(x: f64, mean: f64, std: f64) -> f64 {
    normal_cdf((x - mean) / std)
}
