//! Scalar special functions shared across the crate.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this index harmonic numbers are summed term by term.
const HARMONIC_DIRECT_LIMIT: u64 = 256;

/// Standard normal CDF, accurate in both tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `ln(k!)`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 32 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    libm::lgamma(k as f64 + 1.0)
}

/// `ln C(n, k)` summed over the shorter side, so small `k` stays exact to
/// a few ulps even for huge `n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let m = k.min(n - k);
    (1..=m)
        .map(|j| ((n - m + j) as f64 / j as f64).ln())
        .sum()
}

/// Harmonic number `H_k = 1 + 1/2 + ... + 1/k`, with `H_0 = 0`.
pub fn harmonic(k: u64) -> f64 {
    if k < HARMONIC_DIRECT_LIMIT {
        return direct_harmonic_range(1, k);
    }
    let x = k as f64;
    x.ln() + EULER_GAMMA + asymptotic_tail(x)
}

/// `sum_{j=a}^{b} 1/j` for `1 <= a`; zero when `b < a`.
///
/// Long ranges far from the origin are computed as a difference of the
/// asymptotic expansion with the logarithms combined first, which keeps
/// relative accuracy near machine precision.
pub fn harmonic_range(a: u64, b: u64) -> f64 {
    debug_assert!(a >= 1);
    if b < a {
        return 0.0;
    }
    if b - a < HARMONIC_DIRECT_LIMIT {
        return direct_harmonic_range(a, b);
    }
    let lower = a - 1;
    if lower < HARMONIC_DIRECT_LIMIT {
        return harmonic(b) - harmonic(lower);
    }
    let (hi, lo) = (b as f64, lower as f64);
    (hi / lo).ln() + (asymptotic_tail(hi) - asymptotic_tail(lo))
}

fn direct_harmonic_range(a: u64, b: u64) -> f64 {
    // smallest terms first
    (a..=b).rev().map(|j| 1.0 / j as f64).sum()
}

// H_x - ln x - gamma, truncated after the x^-8 term.
fn asymptotic_tail(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    0.5 * inv - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)))
}

pub fn log2(x: f64) -> f64 {
    x.ln() / LN_2
}
