//! Log-space combinatorial helpers.
//!
//! The distribution code needs `ln n!` and `ln C(n, k)` for `n` up to about
//! 10^6, together with the Stirling remainder
//!
//! ```text
//! delta(n) = ln n! - [n ln n - n + (1/2) ln(2 pi n)]
//! ```
//!
//! on its own. Exposing the remainder separately matters: probability-mass
//! evaluations recombine the large leading Stirling terms analytically so the
//! only floating-point cancellation left is between O(1) quantities, which
//! keeps absolute errors near machine epsilon even when `ln n!` itself is of
//! order 10^5.

use std::sync::OnceLock;

/// ln(2 pi).
pub const LN_TWO_PI: f64 = 1.837_877_066_409_345_6;

/// Largest `n` whose factorial is held exactly (33! fits in a `u128`).
const EXACT_LIMIT: u64 = 33;

fn exact_ln_factorials() -> &'static [f64; 34] {
    static TABLE: OnceLock<[f64; 34]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; 34];
        let mut fact: u128 = 1;
        for n in 1..=EXACT_LIMIT {
            fact *= n as u128;
            table[n as usize] = (fact as f64).ln();
        }
        table
    })
}

/// Stirling-series remainder for `ln x!` at real `x > 0`.
///
/// Uses the asymptotic series through the `x^-9` term; for `x >= 34` the
/// truncation error is below 10^-19, far under one ulp of the result.
fn stirling_series(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Coefficients are B_{2k} / (2k (2k - 1)).
    inv * (1.0 / 12.0
        - inv2
            * (1.0 / 360.0
                - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))))
}

/// Stirling remainder `ln n! - [n ln n - n + (1/2) ln(2 pi n)]` for `n >= 1`.
///
/// Exact-table difference for small `n`, asymptotic series beyond; the result
/// is O(1/n) and carries absolute error near machine epsilon.
pub fn ln_factorial_remainder(n: u64) -> f64 {
    debug_assert!(n >= 1);
    if n <= EXACT_LIMIT {
        let x = n as f64;
        exact_ln_factorials()[n as usize] - (x * x.ln() - x + 0.5 * (LN_TWO_PI + x.ln()))
    } else {
        stirling_series(n as f64)
    }
}

/// Natural logarithm of `n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= EXACT_LIMIT {
        exact_ln_factorials()[n as usize]
    } else {
        let x = n as f64;
        x * x.ln() - x + 0.5 * (LN_TWO_PI + x.ln()) + stirling_series(x)
    }
}

/// Natural logarithm of the binomial coefficient `C(n, k)`.
///
/// Returns negative infinity when `k > n` (the coefficient is zero). The
/// absolute error grows with `ln n!` itself (roughly `eps * n ln n`), so for
/// delicate cancellations prefer recombining [`ln_factorial_remainder`]
/// terms analytically.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}
