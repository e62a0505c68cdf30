//! Exact rational arithmetic for the combinatorial identities behind the
//! distribution, and an exact mass function usable as a ground-truth oracle
//! for the floating-point code.
//!
//! Everything here works over arbitrary-precision rationals; no floating
//! point enters any computation. Two families of checks are provided:
//!
//! * closed forms for the coefficient sums that arise when the normalization
//!   and expectation sums are expanded as polynomials in the per-unit
//!   coupling `x = alpha / N`, and
//! * direct evaluations of both whole-sum identities at arbitrary rational
//!   points, where the finite geometric series on the right-hand side must
//!   match the expanded combinatorial sum term for term.
//!
//! Binomial coefficients follow the generalized convention for negative
//! upper arguments, `C(-1, m) = (-1)^m`, which the boundary evaluations of
//! the coefficient sums rely on.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Zero};

use crate::error::Error;

/// Exact rational number (arbitrary precision, always in lowest terms with a
/// positive denominator).
pub type ExactRational = BigRational;

/// Convenience constructor for small rational constants.
pub fn rational(numerator: i64, denominator: i64) -> ExactRational {
    ExactRational::new(BigInt::from(numerator), BigInt::from(denominator))
}

/// Generalized binomial coefficient `C(n, k)` for integer `n` of either sign.
///
/// For `n >= 0` this is the ordinary coefficient (zero when `k > n`). For
/// `n < 0` the falling-factorial definition applies, equivalently
/// `C(n, k) = (-1)^k C(k - n - 1, k)`; in particular `C(-1, k) = (-1)^k`.
pub fn generalized_binomial(n: i64, k: u64) -> BigInt {
    if n < 0 {
        let flipped = nonneg_binomial((k as i64 - n - 1) as u64, k);
        if k % 2 == 0 {
            flipped
        } else {
            -flipped
        }
    } else {
        nonneg_binomial(n as u64, k)
    }
}

fn nonneg_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut result = BigInt::one();
    for j in 0..k {
        result *= n - j;
        result /= j + 1; // exact at every step for binomial products
    }
    result
}

/// Raise a nonzero rational to an integer power of either sign.
fn rational_pow(base: &ExactRational, exp: i64) -> ExactRational {
    if exp == 0 {
        return ExactRational::one();
    }
    let positive = num::traits::Pow::pow(base, exp.unsigned_abs() as u32);
    if exp > 0 {
        positive
    } else {
        positive.recip()
    }
}

fn require_point_in_unit_fraction(x: &ExactRational, n: u64) -> Result<(), Error> {
    let upper = ExactRational::new(BigInt::one(), BigInt::from(n));
    if x <= &ExactRational::zero() || x >= &upper {
        return Err(Error::RationalPointOutOfRange {
            x: x.to_string(),
            n,
        });
    }
    Ok(())
}

/// Exact probability mass at `l` for coupling `alpha` (rational) and system
/// size `n`: `C * binom(n, l) * (l x)^(l-1) * (1 - l x)^(n-l-1)` with
/// `x = alpha / n`. Off-support arguments give zero mass.
///
/// # Errors
///
/// [`Error::RationalPointOutOfRange`] unless `0 < alpha < 1`.
pub fn exact_pmf(alpha: &ExactRational, n: u64, l: u64) -> Result<ExactRational, Error> {
    require_point_in_unit_fraction(alpha, 1)?;
    if n < 1 {
        return Err(Error::SystemSizeTooSmall(n));
    }
    if l == 0 || l > n {
        return Ok(ExactRational::zero());
    }
    let one = ExactRational::one();
    let n_rat = ExactRational::from(BigInt::from(n));
    let x = alpha / &n_rat;
    let norm = (&one - alpha)
        / (ExactRational::from(BigInt::from(n)) - ExactRational::from(BigInt::from(n - 1)) * alpha);
    let lx = ExactRational::from(BigInt::from(l)) * &x;
    let coefficient = ExactRational::from(nonneg_binomial(n, l));
    let rise = rational_pow(&lx, l as i64 - 1);
    let fall = rational_pow(&(&one - &lx), n as i64 - l as i64 - 1);
    Ok(norm * coefficient * rise * fall)
}

/// Coefficient of `x^i` in the polynomial expansion (scaled by `1/N`) of the
/// truncated normalization sum
/// `sum_{L=1}^{N-1} C(N,L) (Lx)^(L-1) (1 - Lx)^(N-L-1)`.
///
/// Computed as the exact alternating sum
/// `(1/N) * sum_{k=0}^{i} (-1)^(i-k) C(N,k) C(N-k-1, i-k) k^i` for `i >= 1`
/// (the raw sum is always divisible by `N`), and as the raw `k = 0` term
/// (which is 1) for `i = 0`. Equals `N^(i-1)` for every `i >= 1` — the fact
/// that makes the truncated sum a finite geometric series.
pub fn lemma_coefficient(i: u32, n: u64) -> BigInt {
    let raw = lemma_coefficient_sum(i, n);
    if i == 0 {
        return raw;
    }
    let (quotient, remainder) = num::Integer::div_rem(&raw, &BigInt::from(n));
    assert!(
        remainder.is_zero(),
        "alternating coefficient sum {raw} for (i={i}, n={n}) is not divisible by n"
    );
    quotient
}

/// The raw alternating sum `sum_{k=0}^{i} (-1)^(i-k) C(N,k) C(N-k-1, i-k) k^i`
/// with the `0^0 = 1` convention at `k = i = 0`.
fn lemma_coefficient_sum(i: u32, n: u64) -> BigInt {
    let mut total = BigInt::zero();
    for k in 0..=i as u64 {
        let power = if k == 0 {
            if i == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        } else {
            BigInt::from(k).pow(i)
        };
        if power.is_zero() {
            continue;
        }
        let term = generalized_binomial(n as i64, k)
            * generalized_binomial(n as i64 - k as i64 - 1, i as u64 - k)
            * power;
        if (i as u64 - k) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Coefficient of `x^i` in the polynomial expansion of the expectation sum
/// `sum_{L=1}^{N} C(N-1, L-1) (Lx)^(L-1) (1 - Lx)^(N-L-1)`:
///
/// `sum_{k=0}^{i} (-1)^(i-k) C(N-1, k) C(N-k-2, i-k) (k+1)^i`.
///
/// Equals `N^i` for every `i >= 0`, which makes the expectation sum the
/// geometric series `1 / (1 - Nx)`.
pub fn theorem_coefficient(i: u32, n: u64) -> BigInt {
    let mut total = BigInt::zero();
    for k in 0..=i as u64 {
        let term = generalized_binomial(n as i64 - 1, k)
            * generalized_binomial(n as i64 - k as i64 - 2, i as u64 - k)
            * BigInt::from(k + 1).pow(i);
        if (i as u64 - k) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Check the truncated normalization identity at an exact rational point
/// `0 < x < 1/n`:
///
/// ```text
/// sum_{L=1}^{N-1} C(N,L) (Lx)^(L-1) (1 - Lx)^(N-L-1)
///     = N * [1 + x (1 - (Nx)^(N-2)) / (1 - Nx)]
/// ```
///
/// The right-hand side is the closed geometric form of the expansion whose
/// coefficients [`lemma_coefficient`] returns; together with the isolated
/// `L = N` term it yields the normalization constant. For `n = 1` both sides
/// are zero (empty sum).
///
/// # Errors
///
/// [`Error::RationalPointOutOfRange`] unless `0 < x < 1/n`;
/// [`Error::SystemSizeTooSmall`] for `n = 0`.
pub fn check_normalization_identity(n: u64, x: &ExactRational) -> Result<bool, Error> {
    if n < 1 {
        return Err(Error::SystemSizeTooSmall(n));
    }
    require_point_in_unit_fraction(x, n)?;
    let one = ExactRational::one();

    let mut lhs = ExactRational::zero();
    for l in 1..n {
        let lx = ExactRational::from(BigInt::from(l)) * x;
        let term = ExactRational::from(nonneg_binomial(n, l))
            * rational_pow(&lx, l as i64 - 1)
            * rational_pow(&(&one - &lx), n as i64 - l as i64 - 1);
        lhs += term;
    }

    let nx = ExactRational::from(BigInt::from(n)) * x;
    let geometric = &one + x * (&one - rational_pow(&nx, n as i64 - 2)) / (&one - &nx);
    let rhs = ExactRational::from(BigInt::from(n)) * geometric;

    Ok(lhs == rhs)
}

/// Check the expectation identity at an exact rational point `0 < x < 1/n`:
///
/// ```text
/// sum_{L=1}^{N} C(N-1, L-1) (Lx)^(L-1) (1 - Lx)^(N-L-1) = 1 / (1 - Nx)
/// ```
///
/// Summing `L * pmf(L)` reduces to this sum, so it pins the closed-form mean
/// `N / (N - (N-1) alpha)`. For `n = 1` both sides are `1 / (1 - x)`.
///
/// # Errors
///
/// [`Error::RationalPointOutOfRange`] unless `0 < x < 1/n`;
/// [`Error::SystemSizeTooSmall`] for `n = 0`.
pub fn check_expectation_identity(n: u64, x: &ExactRational) -> Result<bool, Error> {
    if n < 1 {
        return Err(Error::SystemSizeTooSmall(n));
    }
    require_point_in_unit_fraction(x, n)?;
    let one = ExactRational::one();

    let mut lhs = ExactRational::zero();
    for l in 1..=n {
        let lx = ExactRational::from(BigInt::from(l)) * x;
        let term = ExactRational::from(nonneg_binomial(n - 1, l - 1))
            * rational_pow(&lx, l as i64 - 1)
            * rational_pow(&(&one - &lx), n as i64 - l as i64 - 1);
        lhs += term;
    }

    let nx = ExactRational::from(BigInt::from(n)) * x;
    let rhs = (&one - &nx).recip();

    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::traits::ToPrimitive;

    #[test]
    fn generalized_binomial_matches_conventions() {
        assert_eq!(generalized_binomial(5, 2), BigInt::from(10));
        assert_eq!(generalized_binomial(0, 0), BigInt::one());
        assert_eq!(generalized_binomial(3, 5), BigInt::zero());
        // Negative upper argument: C(-1, m) = (-1)^m.
        assert_eq!(generalized_binomial(-1, 0), BigInt::from(1));
        assert_eq!(generalized_binomial(-1, 1), BigInt::from(-1));
        assert_eq!(generalized_binomial(-1, 2), BigInt::from(1));
        assert_eq!(generalized_binomial(-1, 3), BigInt::from(-1));
        // C(-2, 3) = (-2)(-3)(-4)/3! = -4.
        assert_eq!(generalized_binomial(-2, 3), BigInt::from(-4));
    }

    #[test]
    fn lemma_coefficient_frozen_values() {
        assert_eq!(lemma_coefficient(0, 3), BigInt::one());
        assert_eq!(lemma_coefficient(0, 12), BigInt::one());
        assert_eq!(lemma_coefficient(1, 5), BigInt::one());
        assert_eq!(lemma_coefficient(3, 6), BigInt::from(36));
    }

    #[test]
    fn lemma_coefficient_equals_power_over_grid() {
        for n in 1..=12u64 {
            for i in 1..=8u32 {
                let expected = BigInt::from(n).pow(i - 1);
                assert_eq!(
                    lemma_coefficient(i, n),
                    expected,
                    "lemma coefficient mismatch at (i={i}, n={n})"
                );
            }
            assert_eq!(lemma_coefficient(0, n), BigInt::one());
        }
    }

    #[test]
    fn theorem_coefficient_frozen_values() {
        assert_eq!(theorem_coefficient(0, 4), BigInt::one());
        // i = 1, n = 7: -C(5,1) + 2 C(6,1) = -5 + 12 = 7.
        assert_eq!(theorem_coefficient(1, 7), BigInt::from(7));
        // i = 2, n = 5: C(3,2) - 4 C(4,1) C(2,1) ... = 3 - 32 + 54 = 25.
        assert_eq!(theorem_coefficient(2, 5), BigInt::from(25));
    }

    #[test]
    fn theorem_coefficient_equals_power_over_grid() {
        for n in 1..=12u64 {
            for i in 0..=8u32 {
                let expected = BigInt::from(n).pow(i);
                assert_eq!(
                    theorem_coefficient(i, n),
                    expected,
                    "theorem coefficient mismatch at (i={i}, n={n})"
                );
            }
        }
    }

    #[test]
    fn normalization_identity_holds_at_frozen_points() {
        assert!(check_normalization_identity(3, &rational(1, 6)).unwrap());
        assert!(check_normalization_identity(2, &rational(1, 4)).unwrap());
        assert!(check_normalization_identity(8, &rational(1, 16)).unwrap());
        // Empty sum against a vanishing geometric form.
        assert!(check_normalization_identity(1, &rational(1, 2)).unwrap());
    }

    #[test]
    fn expectation_identity_holds_at_frozen_points() {
        assert!(check_expectation_identity(2, &rational(1, 4)).unwrap());
        assert!(check_expectation_identity(5, &rational(1, 10)).unwrap());
        // n = 1: single term (1 - x)^(-1) against 1/(1 - x).
        assert!(check_expectation_identity(1, &rational(3, 7)).unwrap());
    }

    #[test]
    fn identities_hold_across_a_rational_sweep() {
        for n in 1..=10u64 {
            for denom_scale in [2i64, 3, 7] {
                let x = ExactRational::new(BigInt::one(), BigInt::from(n as i64 * denom_scale));
                assert!(
                    check_normalization_identity(n, &x).unwrap(),
                    "normalization failed at n={n}, x=1/{}",
                    n as i64 * denom_scale
                );
                assert!(
                    check_expectation_identity(n, &x).unwrap(),
                    "expectation failed at n={n}, x=1/{}",
                    n as i64 * denom_scale
                );
            }
        }
    }

    #[test]
    fn identity_points_must_lie_inside_the_open_interval() {
        for bad in [rational(0, 1), rational(1, 3), rational(-1, 6), rational(2, 3)] {
            assert!(matches!(
                check_normalization_identity(3, &bad),
                Err(Error::RationalPointOutOfRange { .. })
            ));
            assert!(matches!(
                check_expectation_identity(3, &bad),
                Err(Error::RationalPointOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn exact_pmf_frozen_values() {
        let half = rational(1, 2);
        assert_eq!(exact_pmf(&half, 3, 1).unwrap(), rational(5, 8));
        assert_eq!(exact_pmf(&half, 3, 2).unwrap(), rational(1, 4));
        assert_eq!(exact_pmf(&half, 3, 3).unwrap(), rational(1, 8));
        assert_eq!(exact_pmf(&half, 3, 0).unwrap(), ExactRational::zero());
        assert_eq!(exact_pmf(&half, 3, 4).unwrap(), ExactRational::zero());
        // Single unit: the mass is exactly 1.
        assert_eq!(exact_pmf(&rational(9, 10), 1, 1).unwrap(), ExactRational::one());
    }

    #[test]
    fn exact_pmf_sums_to_one_exactly() {
        for alpha in [rational(1, 3), rational(1, 2), rational(9, 10), rational(99, 100)] {
            for n in [1u64, 2, 3, 7, 15, 24] {
                let total: ExactRational = (1..=n)
                    .map(|l| exact_pmf(&alpha, n, l).unwrap())
                    .fold(ExactRational::zero(), |a, b| a + b);
                assert_eq!(total, ExactRational::one(), "alpha={alpha} n={n}");
            }
        }
    }

    #[test]
    fn float_pmf_matches_exact_oracle_to_high_precision() {
        use crate::distribution::AbelianParams;
        for (num, den) in [(1i64, 10i64), (1, 2), (9, 10), (99, 100)] {
            let alpha_rat = rational(num, den);
            let alpha = num as f64 / den as f64;
            for n in 1..=25u64 {
                let p = AbelianParams::new(alpha, n).unwrap();
                for l in 1..=n {
                    let exact = exact_pmf(&alpha_rat, n, l).unwrap().to_f64().unwrap();
                    let got = p.pmf(l);
                    let rel = ((got - exact) / exact).abs();
                    assert!(
                        rel < 1e-13,
                        "alpha={num}/{den} n={n} l={l}: float {got}, exact {exact}, rel {rel}"
                    );
                }
            }
        }
    }

    /// ln of a positive rational via its decimal digits, good to ~1e-15
    /// absolute, independent of any crate evaluation path.
    fn approx_ln(r: &ExactRational) -> f64 {
        fn big_ln(v: &BigInt) -> f64 {
            let digits = v.to_string();
            let take = digits.len().min(17);
            let mantissa: f64 = digits[..take].parse().unwrap();
            mantissa.ln() + (digits.len() - take) as f64 * std::f64::consts::LN_10
        }
        big_ln(r.numer()) - big_ln(r.denom())
    }

    #[test]
    fn float_log_pmf_matches_exact_oracle_at_n200() {
        use crate::distribution::AbelianParams;
        let alpha_rat = rational(1, 2);
        let p = AbelianParams::new(0.5, 200).unwrap();
        for l in [1u64, 2, 3, 10, 50, 100, 150, 199, 200] {
            let exact = approx_ln(&exact_pmf(&alpha_rat, 200, l).unwrap());
            let got = p.log_pmf(l);
            assert!(
                (got - exact).abs() < 1e-10 * exact.abs().max(1.0),
                "l={l}: float {got}, exact {exact}"
            );
        }
    }
}
