//! Standard normal distribution helpers used by the Gaussian decision model.

use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Below this argument the tails are evaluated through the Mills ratio
/// continued fraction instead of `erfc`, which underflows near -38.
const TAIL_CUTOFF: f64 = -5.0;

const CF_TERMS: usize = 120;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Mills ratio `(1 - Φ(t)) / φ(t)` for `t > 0`, by backward evaluation of
/// `1 / (t + 1/(t + 2/(t + 3/(t + ...))))`.
fn mills_ratio(t: f64) -> f64 {
    let mut f = t;
    for k in (1..=CF_TERMS).rev() {
        f = t + k as f64 / f;
    }
    1.0 / f
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_normal_cdf(x: f64) -> f64 {
    if x < TAIL_CUTOFF {
        -0.5 * x * x - 0.5 * (2.0 * PI).ln() + mills_ratio(-x).ln()
    } else if x > 0.0 {
        (-0.5 * erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else {
        normal_cdf(x).ln()
    }
}

/// `φ(x) / Φ(x)`, the derivative of [`log_normal_cdf`].
pub fn inverse_mills(x: f64) -> f64 {
    if x < TAIL_CUTOFF {
        1.0 / mills_ratio(-x)
    } else {
        normal_pdf(x) / normal_cdf(x)
    }
}
