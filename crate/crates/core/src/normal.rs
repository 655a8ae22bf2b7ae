//! Standard normal helpers.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    }
}

/// `P(a <= N(0, 1) <= b)` computed from the tail nearer zero.
pub fn interval(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a > 0.0 {
        (cdf(-a) - cdf(-b)).max(0.0)
    } else {
        (cdf(b) - cdf(a)).max(0.0)
    }
}

/// Standard normal quantile; `u` is clamped to the open unit interval.
pub fn quantile(u: f64) -> f64 {
    let u = u.clamp(1e-300, 1.0 - f64::EPSILON / 2.0);
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u);
    // One Halley step against the accurate distribution function.
    let density = pdf(x);
    if density <= 0.0 || !x.is_finite() {
        return x;
    }
    let e = if x < 0.0 { cdf(x) - u } else { (1.0 - u) - cdf(-x) };
    let step = e / density;
    x - step / (1.0 + 0.5 * x * step)
}
