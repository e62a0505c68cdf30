//! Shape analysis of the distribution: the monotone/non-monotone regime
//! boundary, log-log curvature, and power-law tail exponents.
//!
//! For small coupling the mass function decreases strictly in `L`; close to
//! `alpha = 1` it develops a bump at the system size. The critical coupling
//!
//! ```text
//! alpha_crit(N) = sup { alpha : P(L+1) < P(L) for all L < N }
//! ```
//!
//! separates the regimes and scales roughly as `1 - 1/sqrt(N)`. A second,
//! geometric signature of criticality is the curvature of `ln P` against
//! `ln L`: the set `A(N)` of couplings where the curvature changes sign
//! brackets `alpha_crit(N)` in practice, and near criticality the mass
//! function runs as a power law `P(L) ~ L^(-3/2)` over a widening range.
//!
//! Discretization conventions used throughout: monotonicity is the strict
//! forward difference of `ln P` with ties counted as non-monotone; curvature
//! is the three-point second-difference stencil on the non-uniform grid
//! `(ln L, ln P(L))` at interior points `2 <= L <= N-1`; tail exponents are
//! least-squares slopes of `ln P` against `ln L` over an explicit window.

use serde::Serialize;

use crate::distribution::AbelianParams;
use crate::error::Error;

/// Forward differences of `ln P` closer to zero than this count as ties,
/// and a tie breaks strict monotonicity.
pub const MONOTONE_TIE_TOLERANCE: f64 = 1e-14;

/// Fixed bisection bracket for [`alpha_crit`]: the distribution is strictly
/// decreasing at the lower end for every `N >= 2`, and has a terminal bump
/// at the upper end.
const BRACKET_LO: f64 = 1e-6;
const BRACKET_HI: f64 = 1.0 - 1e-9;

/// Safety cap on bisection steps (each halves the bracket, so 200 is far
/// beyond any representable tolerance).
const MAX_BISECTION_STEPS: u32 = 200;

/// Whether the mass function decreases strictly over the whole support.
///
/// Uses the forward difference `ln P(L+1) - ln P(L)`; every difference must
/// be below `-`[`MONOTONE_TIE_TOLERANCE`]. Vacuously true for `N = 1`.
pub fn is_monotone_decreasing(params: &AbelianParams) -> bool {
    let n = params.n();
    let mut prev = params.log_pmf(1);
    for l in 2..=n {
        let next = params.log_pmf(l);
        if next - prev >= -MONOTONE_TIE_TOLERANCE {
            return false;
        }
        prev = next;
    }
    true
}

/// The critical coupling `alpha_crit(N)`: the supremum of couplings for
/// which the mass function still decreases strictly.
///
/// Located by bisection on [`is_monotone_decreasing`] over a fixed bracket,
/// after verifying that the predicate actually holds at the lower end and
/// fails at the upper end; the returned value is the bracket midpoint once
/// its width drops below `tol`.
///
/// # Errors
///
/// [`Error::SystemSizeBelowMinimum`] for `n < 2` (a single-point support has
/// no shape); [`Error::InvalidTolerance`] for a non-positive `tol`;
/// [`Error::BracketNotTransitional`] (carrying both endpoint couplings and
/// predicate values) if the predicate does not flip across the bracket.
pub fn alpha_crit(n: u64, tol: f64) -> Result<f64, Error> {
    if n < 2 {
        return Err(Error::SystemSizeBelowMinimum {
            operation: "alpha_crit",
            min: 2,
            n,
        });
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidTolerance {
            what: "tolerance",
            value: tol,
        });
    }
    let monotone_at = |alpha: f64| {
        let params = AbelianParams::new(alpha, n).expect("bracket stays inside (0, 1)");
        is_monotone_decreasing(&params)
    };

    let (mut lo, mut hi) = (BRACKET_LO, BRACKET_HI);
    let (lo_monotone, hi_monotone) = (monotone_at(lo), monotone_at(hi));
    if !lo_monotone || hi_monotone {
        return Err(Error::BracketNotTransitional {
            alpha_lo: lo,
            lo_monotone,
            alpha_hi: hi,
            hi_monotone,
        });
    }

    let mut steps = 0_u32;
    while hi - lo > tol && steps < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if monotone_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(0.5 * (lo + hi))
}

/// Second derivative of `y` against `ln L` on the support `{1, ..., len}`,
/// where `y[l - 1]` is a log-mass value; one entry per interior point
/// `2 <= L <= len - 1`.
///
/// Uses the exact three-point stencil for the non-uniform abscissae
/// `ln(L-1), ln L, ln(L+1)`; the stencil is formed from differences
/// `y(L±1) - y(L)` so that an exactly log-linear input yields zeros down to
/// rounding.
///
/// # Errors
///
/// [`Error::SystemSizeBelowMinimum`] when fewer than three support points
/// are supplied.
pub fn log_log_curvature_of(log_masses: &[f64]) -> Result<Vec<f64>, Error> {
    let n = log_masses.len() as u64;
    if n < 3 {
        return Err(Error::SystemSizeBelowMinimum {
            operation: "log_log_curvature",
            min: 3,
            n,
        });
    }
    let mut curvature = Vec::with_capacity((n - 2) as usize);
    for l in 2..n {
        let idx = (l - 1) as usize;
        let h1 = (1.0 / (l - 1) as f64).ln_1p(); // ln L - ln(L-1)
        let h2 = (1.0 / l as f64).ln_1p(); // ln(L+1) - ln L
        let down = log_masses[idx - 1] - log_masses[idx];
        let up = log_masses[idx + 1] - log_masses[idx];
        curvature.push(2.0 * (down * h2 + up * h1) / (h1 * h2 * (h1 + h2)));
    }
    Ok(curvature)
}

/// [`log_log_curvature_of`] applied to the distribution's own log masses.
///
/// # Errors
///
/// [`Error::SystemSizeBelowMinimum`] for `N < 3`.
pub fn log_log_curvature(params: &AbelianParams) -> Result<Vec<f64>, Error> {
    let masses: Vec<f64> = (1..=params.n()).map(|l| params.log_pmf(l)).collect();
    log_log_curvature_of(&masses)
}

fn curvature_changes_sign(curvature: &[f64]) -> bool {
    curvature.windows(2).any(|w| w[0] * w[1] < 0.0)
}

/// The curvature-transition region `A(N)`: the smallest interval covering
/// every scanned coupling at which the log-log curvature changes sign
/// somewhere in the support interior.
///
/// Scans `alpha = step, 2 step, ...` strictly inside `(0, 1)` and returns
/// `None` when no scanned coupling exhibits a sign change (always the case
/// for `N = 3`, whose single interior point admits no change).
///
/// # Errors
///
/// [`Error::SystemSizeBelowMinimum`] for `n < 3`;
/// [`Error::InvalidTolerance`] unless `0 < step < 1`.
pub fn critical_region(n: u64, step: f64) -> Result<Option<(f64, f64)>, Error> {
    if n < 3 {
        return Err(Error::SystemSizeBelowMinimum {
            operation: "critical_region",
            min: 3,
            n,
        });
    }
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::InvalidTolerance {
            what: "grid step",
            value: step,
        });
    }
    let mut lo = None;
    let mut hi = None;
    let mut k = 1_u64;
    loop {
        let alpha = k as f64 * step;
        if alpha >= 1.0 {
            break;
        }
        let params = AbelianParams::new(alpha, n).expect("scan stays inside (0, 1)");
        if curvature_changes_sign(&log_log_curvature(&params)?) {
            lo.get_or_insert(alpha);
            hi = Some(alpha);
        }
        k += 1;
    }
    Ok(lo.zip(hi))
}

/// One row of the finite-size scaling table produced by
/// [`alpha_crit_scaling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    /// System size.
    pub n: u64,
    /// Measured critical coupling.
    pub alpha_crit: f64,
    /// The square-root scaling law `1 - 1/sqrt(N)`.
    pub one_minus_inv_sqrt_n: f64,
    /// `alpha_crit - (1 - 1/sqrt(N))`.
    pub deviation: f64,
}

/// Tabulate `alpha_crit(N)` against the `1 - 1/sqrt(N)` law for each
/// requested system size. Purely descriptive: no row is asserted to lie
/// within any tolerance of the law.
///
/// # Errors
///
/// Propagates [`alpha_crit`] errors for any entry.
pub fn alpha_crit_scaling(ns: &[u64], tol: f64) -> Result<Vec<ScalingRow>, Error> {
    ns.iter()
        .map(|&n| {
            let measured = alpha_crit(n, tol)?;
            let law = 1.0 - 1.0 / (n as f64).sqrt();
            Ok(ScalingRow {
                n,
                alpha_crit: measured,
                one_minus_inv_sqrt_n: law,
                deviation: measured - law,
            })
        })
        .collect()
}

/// Least-squares slope of `y` against `ln L` over the window
/// `l_min..=l_max`, where `y[l - 1]` holds the log mass at `L = l`.
///
/// # Errors
///
/// [`Error::SizeExceedsSystem`] when the window runs past the support;
/// [`Error::WindowTooNarrow`] when it holds fewer than three points.
pub fn tail_exponent_of(log_masses: &[f64], l_min: u64, l_max: u64) -> Result<f64, Error> {
    let n = log_masses.len() as u64;
    if l_max > n {
        return Err(Error::SizeExceedsSystem { size: l_max, n });
    }
    let points = if l_min >= 1 && l_min < l_max {
        l_max - l_min + 1
    } else {
        0
    };
    if points < 3 {
        return Err(Error::WindowTooNarrow {
            lo: l_min,
            hi: l_max,
            points,
            min: 3,
        });
    }
    // Centered least squares: slope = sum (x - xbar) y / sum (x - xbar)^2.
    let xs: Vec<f64> = (l_min..=l_max).map(|l| (l as f64).ln()).collect();
    let ys: Vec<f64> = (l_min..=l_max)
        .map(|l| log_masses[(l - 1) as usize])
        .collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xbar) * y;
        den += (x - xbar) * (x - xbar);
    }
    Ok(num / den)
}

/// Power-law tail exponent of the distribution: the least-squares slope of
/// `ln P(L)` against `ln L` over `l_min..=l_max`. Near criticality this
/// approaches `-3/2` over a widening window.
///
/// # Errors
///
/// As [`tail_exponent_of`].
pub fn tail_exponent(params: &AbelianParams, l_min: u64, l_max: u64) -> Result<f64, Error> {
    if l_max > params.n() {
        return Err(Error::SizeExceedsSystem {
            size: l_max,
            n: params.n(),
        });
    }
    let masses: Vec<f64> = (1..=params.n()).map(|l| params.log_pmf(l)).collect();
    tail_exponent_of(&masses, l_min, l_max)
}

/// Default tail-fit window `[max(2, N^0.1), N^0.5]`, clipped to the support.
pub fn default_tail_window(n: u64) -> (u64, u64) {
    let lo = ((n as f64).powf(0.1).floor() as u64).max(2);
    let hi = ((n as f64).sqrt().floor() as u64).min(n);
    (lo, hi)
}

/// Which side of the critical region a coupling falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Below the critical region: strictly decreasing mass function.
    Subcritical,
    /// Inside the curvature-transition region.
    CriticalRegion,
    /// Above the critical region: a bump develops at the system size.
    Supercritical,
}

/// Summary of the criticality analysis for one system size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityReport {
    /// System size analysed.
    pub n: u64,
    /// Measured critical coupling (bisection midpoint).
    pub alpha_crit: f64,
    /// Curvature-transition region `A(N)` as `(low, high)`, if any scanned
    /// coupling showed a sign change.
    pub a_region: Option<(f64, f64)>,
    /// Whether `alpha_crit` falls inside `a_region`.
    pub alpha_crit_in_region: bool,
    /// Window used for the tail fit, when the support admits one.
    pub tail_window: Option<(u64, u64)>,
    /// Tail exponent at the critical coupling over `tail_window`.
    pub tail_exponent: Option<f64>,
}

impl CriticalityReport {
    /// Run the full analysis: critical coupling at tolerance `tol`, the
    /// curvature region at grid `step`, and the tail exponent at the
    /// critical coupling over the default window.
    ///
    /// # Errors
    ///
    /// [`Error::SystemSizeBelowMinimum`] for `n < 2`, plus any error from
    /// the underlying scans.
    pub fn analyze(n: u64, tol: f64, step: f64) -> Result<Self, Error> {
        let ac = alpha_crit(n, tol)?;
        let a_region = if n >= 3 {
            critical_region(n, step)?
        } else {
            None
        };
        let alpha_crit_in_region = a_region.map_or(false, |(lo, hi)| lo <= ac && ac <= hi);
        let (w_lo, w_hi) = default_tail_window(n);
        let (tail_window, tail_exponent) = if w_lo < w_hi && w_hi - w_lo >= 2 {
            let params = AbelianParams::new(ac, n).expect("alpha_crit lies inside (0, 1)");
            (Some((w_lo, w_hi)), Some(tail_exponent(&params, w_lo, w_hi)?))
        } else {
            (None, None)
        };
        Ok(Self {
            n,
            alpha_crit: ac,
            a_region,
            alpha_crit_in_region,
            tail_window,
            tail_exponent,
        })
    }

    /// Classify a coupling against this report's region (falling back to a
    /// two-way split at `alpha_crit` when the region is empty).
    pub fn regime(&self, alpha: f64) -> Regime {
        match self.a_region {
            Some((lo, hi)) => {
                if alpha < lo {
                    Regime::Subcritical
                } else if alpha <= hi {
                    Regime::CriticalRegion
                } else {
                    Regime::Supercritical
                }
            }
            None => {
                if alpha < self.alpha_crit {
                    Regime::Subcritical
                } else {
                    Regime::Supercritical
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_pmf, rational, ExactRational};

    fn params(alpha: f64, n: u64) -> AbelianParams {
        AbelianParams::new(alpha, n).unwrap()
    }

    #[test]
    fn monotonicity_frozen_cases() {
        assert!(is_monotone_decreasing(&params(0.1, 100)));
        assert!(!is_monotone_decreasing(&params(0.99, 100)));
        // N = 2 has the exact boundary 2/3.
        assert!(is_monotone_decreasing(&params(0.6, 2)));
        assert!(!is_monotone_decreasing(&params(0.7, 2)));
        // Vacuous for a single support point.
        assert!(is_monotone_decreasing(&params(0.5, 1)));
    }

    #[test]
    fn alpha_crit_of_two_matches_the_closed_form() {
        // P(2) = P(1) at alpha/(2(1-alpha)) = 1, i.e. alpha = 2/3.
        let ac = alpha_crit(2, 1e-9).unwrap();
        assert!((ac - 2.0 / 3.0).abs() < 1e-8, "got {ac}");
    }

    /// Exact-rational monotonicity, entirely independent of the float path.
    fn exact_monotone(alpha: &ExactRational, n: u64) -> bool {
        (1..n).all(|l| {
            exact_pmf(alpha, n, l + 1).unwrap() < exact_pmf(alpha, n, l).unwrap()
        })
    }

    #[test]
    fn alpha_crit_of_four_matches_the_exact_scan_oracle() {
        // Rational bisection of the exact predicate pins the transition.
        let mut lo = rational(1, 1000);
        let mut hi = rational(999, 1000);
        assert!(exact_monotone(&lo, 4));
        assert!(!exact_monotone(&hi, 4));
        for _ in 0..40 {
            let mid = (&lo + &hi) / rational(2, 1);
            if exact_monotone(&mid, 4) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // The transition solves 16x = 9(1 - 4x) at x = alpha/4: alpha = 9/13.
        let closed_form = rational(9, 13);
        assert!(lo < closed_form && closed_form < hi);

        let oracle = 9.0 / 13.0;
        let ac = alpha_crit(4, 1e-9).unwrap();
        assert!((ac - oracle).abs() < 1e-6, "got {ac}, oracle {oracle}");
    }

    #[test]
    fn alpha_crit_of_one_hundred_is_near_the_scaling_law() {
        let ac = alpha_crit(100, 1e-6).unwrap();
        assert!((ac - 0.9).abs() < 0.05, "got {ac}");
    }

    #[test]
    fn exact_oracle_brackets_the_boundary_at_n64() {
        // Exact rational evaluations confirm the float boundary location
        // (0.91482... at N = 64): strictly monotone just below, a violated
        // pair just above. The nominal 1 - 1/sqrt(N) value 7/8 = 0.875 lies
        // well inside the monotone regime, pinning the measured fact that
        // the boundary gap 1 - alpha_crit runs near 1/sqrt(2N), not
        // 1/sqrt(N).
        assert!(exact_monotone(&rational(7, 8), 64));
        assert!(exact_monotone(&rational(914, 1000), 64));
        assert!(!exact_monotone(&rational(916, 1000), 64));

        let ac = alpha_crit(64, 1e-9).unwrap();
        assert!((0.914..0.916).contains(&ac), "got {ac}");
    }

    #[test]
    fn alpha_crit_validates_inputs() {
        assert!(matches!(
            alpha_crit(1, 1e-6),
            Err(Error::SystemSizeBelowMinimum { min: 2, n: 1, .. })
        ));
        assert!(matches!(
            alpha_crit(10, 0.0),
            Err(Error::InvalidTolerance { .. })
        ));
        assert!(matches!(
            alpha_crit(10, f64::NAN),
            Err(Error::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn predicate_is_dichotomous_around_alpha_crit() {
        for n in [10u64, 100, 1000] {
            let ac = alpha_crit(n, 1e-6).unwrap();
            let mut alpha = 1e-3;
            while alpha < 0.999 {
                let got = is_monotone_decreasing(&params(alpha, n));
                // Allow one grid step of slack around the located boundary.
                if alpha < ac - 1e-3 {
                    assert!(got, "n={n}, alpha={alpha}: expected monotone");
                } else if alpha > ac + 1e-3 {
                    assert!(!got, "n={n}, alpha={alpha}: expected non-monotone");
                }
                alpha += 1e-3;
            }
        }
    }

    #[test]
    fn curvature_of_a_pure_power_law_vanishes() {
        // y = c + gamma ln L is exactly log-linear, so every stencil entry
        // must be zero down to rounding.
        let masses: Vec<f64> = (1..=500u64)
            .map(|l| 3.7 - 1.5 * (l as f64).ln())
            .collect();
        let curvature = log_log_curvature_of(&masses).unwrap();
        assert_eq!(curvature.len(), 498);
        for (i, c) in curvature.iter().enumerate() {
            assert!(c.abs() < 1e-8, "L={}: curvature {c}", i + 2);
        }
    }

    #[test]
    fn curvature_sign_structure_distinguishes_the_regimes() {
        // Deep subcritical: concave everywhere in log-log, no sign change.
        let sub = log_log_curvature(&params(0.1, 100)).unwrap();
        assert!(!curvature_changes_sign(&sub));
        assert!(sub.iter().all(|&c| c < 0.0));
        // Supercritical: the bump at L = N forces a sign change.
        let sup = log_log_curvature(&params(0.99, 100)).unwrap();
        assert!(curvature_changes_sign(&sup));
    }

    #[test]
    fn curvature_requires_three_support_points() {
        assert!(matches!(
            log_log_curvature(&params(0.5, 2)),
            Err(Error::SystemSizeBelowMinimum { min: 3, .. })
        ));
        assert_eq!(log_log_curvature(&params(0.5, 3)).unwrap().len(), 1);
    }

    #[test]
    fn critical_region_is_empty_for_three_units() {
        // One interior point admits no sign change whatever the coupling.
        assert_eq!(critical_region(3, 1e-3).unwrap(), None);
    }

    #[test]
    fn critical_region_covers_alpha_crit_at_n100() {
        let ac = alpha_crit(100, 1e-6).unwrap();
        let (lo, hi) = critical_region(100, 1e-3).unwrap().unwrap();
        assert!(lo <= ac && ac <= hi, "alpha_crit {ac} outside [{lo}, {hi}]");
        assert!(hi >= 0.99, "region top {hi}");
    }

    #[test]
    fn critical_region_validates_inputs() {
        assert!(matches!(
            critical_region(2, 1e-3),
            Err(Error::SystemSizeBelowMinimum { min: 3, .. })
        ));
        assert!(matches!(
            critical_region(10, 0.0),
            Err(Error::InvalidTolerance { .. })
        ));
        assert!(matches!(
            critical_region(10, 1.0),
            Err(Error::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn scaling_table_reports_the_square_root_law() {
        let rows = alpha_crit_scaling(&[16, 64], 1e-6).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            let law = 1.0 - 1.0 / (row.n as f64).sqrt();
            assert_eq!(row.one_minus_inv_sqrt_n, law);
            assert!((row.deviation - (row.alpha_crit - law)).abs() < 1e-15);
            assert!(row.deviation.abs() < 0.15, "n={}: {row:?}", row.n);
        }
        assert!(rows[0].alpha_crit < rows[1].alpha_crit);
    }

    #[test]
    fn tail_exponent_recovers_a_synthetic_slope_exactly() {
        let masses: Vec<f64> = (1..=1000u64)
            .map(|l| -0.25 - 1.5 * (l as f64).ln())
            .collect();
        let slope = tail_exponent_of(&masses, 10, 100).unwrap();
        assert!((slope - (-1.5)).abs() < 1e-10, "got {slope}");
    }

    #[test]
    fn tail_exponent_validates_the_window() {
        let p = params(0.9, 100);
        assert!(matches!(
            tail_exponent(&p, 2, 101),
            Err(Error::SizeExceedsSystem { size: 101, n: 100 })
        ));
        assert!(matches!(
            tail_exponent(&p, 5, 6),
            Err(Error::WindowTooNarrow { points: 2, .. })
        ));
        assert!(matches!(
            tail_exponent(&p, 0, 10),
            Err(Error::WindowTooNarrow { .. })
        ));
        assert!(matches!(
            tail_exponent(&p, 9, 9),
            Err(Error::WindowTooNarrow { .. })
        ));
    }

    #[test]
    fn near_critical_tail_approaches_minus_three_halves() {
        let slope = tail_exponent(&params(1.0 - 1e-6, 10_000), 10, 100).unwrap();
        assert!((slope - (-1.5)).abs() < 0.1, "got {slope}");
    }

    #[test]
    fn subcritical_tail_is_much_steeper() {
        let slope = tail_exponent(&params(0.1, 100), 2, 20).unwrap();
        assert!(slope < -3.0, "got {slope}");
    }

    #[test]
    fn default_window_tracks_the_support() {
        assert_eq!(default_tail_window(100), (2, 10));
        assert_eq!(default_tail_window(10_000), (2, 100));
        let (lo, hi) = default_tail_window(1_000_000);
        assert_eq!((lo, hi), (3, 1000));
    }

    #[test]
    fn report_assembles_all_signatures() {
        let report = CriticalityReport::analyze(100, 1e-6, 1e-3).unwrap();
        assert_eq!(report.n, 100);
        assert!((report.alpha_crit - 0.9).abs() < 0.05);
        assert!(report.a_region.is_some());
        assert!(report.alpha_crit_in_region);
        assert_eq!(report.tail_window, Some((2, 10)));
        assert!(report.tail_exponent.is_some());

        assert_eq!(report.regime(0.2), Regime::Subcritical);
        assert_eq!(report.regime(report.alpha_crit), Regime::CriticalRegion);
        assert_eq!(report.regime(0.9999), Regime::Supercritical);

        assert!(matches!(
            CriticalityReport::analyze(1, 1e-6, 1e-3),
            Err(Error::SystemSizeBelowMinimum { min: 2, n: 1, .. })
        ));
    }
}
