//! Marginal transforms for the Gaussian copula.
//!
//! The unit-variance t3 variable `T = t_3 / sqrt(3)` has an elementary CDF.
//! Writing `T = tan(theta)`,
//!
//! ```text
//! P(T <= x) = 1/2 + (theta + sin(theta) cos(theta)) / pi
//! ```
//!
//! and with `u = pi - 2 theta` the upper tail becomes `(u - sin u) / (2 pi)`.
//! The quantile therefore reduces to solving `u - sin u = 2 pi q` for one
//! scalar on `(0, pi]`, then `x = cot(u / 2)`. Working from the tail
//! probability keeps full relative precision far into both tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::erfc;

/// `P(Z > z)` for a standard normal, accurate in the upper tail.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// `u - sin(u)` without cancellation for small `u`.
fn u_minus_sin(u: f64) -> f64 {
    if u < 0.5 {
        let u2 = u * u;
        // u^3/3! - u^5/5! + u^7/7! - ... through u^13
        let series = 1.0 / 6.0
            - u2 * (1.0 / 120.0
                - u2 * (1.0 / 5040.0
                    - u2 * (1.0 / 362_880.0 - u2 * (1.0 / 39_916_800.0 - u2 / 6_227_020_800.0))));
        u * u2 * series
    } else {
        u - u.sin()
    }
}

/// Solves `u - sin(u) = 2 pi q` for `q` in `(0, 1/2]`.
fn solve_tail_angle(q: f64) -> f64 {
    let target = 2.0 * PI * q;
    let (mut lo, mut hi) = (0.0, PI);
    // u - sin u <= u^3/6, so this starts at or left of the root.
    let mut u = (6.0 * target).cbrt().min(PI);
    for _ in 0..100 {
        let h = u_minus_sin(u) - target;
        if h == 0.0 {
            return u;
        }
        if h < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let half = 0.5 * u;
        let slope = 2.0 * half.sin().powi(2);
        let newton = u - h / slope;
        if (newton - u).abs() <= 4.0 * f64::EPSILON * u {
            return newton;
        }
        u = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    u
}

/// Value `x > 0` with `P(T > x) = q`, for `q` in `(0, 1/2]`.
pub fn t3_unit_upper_quantile(q: f64) -> f64 {
    if q <= 0.0 {
        return f64::INFINITY;
    }
    if q >= 0.5 {
        return 0.0;
    }
    let u = solve_tail_angle(q);
    1.0 / (0.5 * u).tan()
}

/// Quantile of the unit-variance t3 distribution.
pub fn t3_unit_quantile(p: f64) -> f64 {
    if p.is_nan() {
        return f64::NAN;
    }
    if p < 0.5 {
        -t3_unit_upper_quantile(p)
    } else {
        t3_unit_upper_quantile(1.0 - p)
    }
}

/// CDF of the unit-variance t3 distribution.
pub fn t3_unit_cdf(x: f64) -> f64 {
    if x == 0.0 || x.is_nan() {
        return if x.is_nan() { x } else { 0.5 };
    }
    let tail = u_minus_sin(2.0 * (1.0 / x.abs()).atan()) / (2.0 * PI);
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Maps a standard normal coordinate to a unit-variance t3 value with the
/// same quantile level, `F_t^{-1}(Phi(z))`.
pub fn t3_unit_from_gaussian(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let q = normal_upper_tail(z.abs());
    t3_unit_upper_quantile(q).copysign(z)
}
