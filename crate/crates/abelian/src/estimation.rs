//! Maximum-likelihood estimation of the coupling `alpha` and, jointly, the
//! effective system size `N` from observed avalanche sizes.
//!
//! The profile log-likelihood in `alpha` is smooth and, in practice,
//! unimodal; it is maximized by golden-section search over
//! `[epsilon, 1 - epsilon]` after a coarse guard scan that protects the
//! bracket against multimodality. `N` is not continuous, so the joint fit
//! profiles `alpha` over an explicit integer grid of candidate sizes and
//! keeps the best profile, breaking likelihood ties toward the smaller `N`.
//!
//! Datasets are histograms (`size -> count`), so fitting is invariant under
//! permutation of the raw observations by construction, and the likelihood
//! costs O(distinct sizes) per evaluation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::distribution::AbelianParams;
use crate::error::Error;

/// Lower clamp for the fitted coupling; the search interval is
/// `[ALPHA_EPSILON, 1 - ALPHA_EPSILON]`.
pub const ALPHA_EPSILON: f64 = 1e-9;

/// Number of coarse scan points that guard the golden-section bracket.
const GUARD_GRID_POINTS: usize = 64;

/// Hard cap on golden-section iterations.
const MAX_GOLDEN_ITERATIONS: u32 = 200;

/// A fit is flagged as a boundary solution when it lands within this margin
/// of either end of the search interval.
const BOUNDARY_MARGIN: f64 = 10.0 * ALPHA_EPSILON;

/// Observed avalanche sizes, stored as a sorted histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeDataset {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl SizeDataset {
    /// Build a dataset from raw observations.
    ///
    /// # Errors
    ///
    /// [`Error::NonPositiveObservation`] on a zero size,
    /// [`Error::EmptyDataset`] when no observations are supplied.
    pub fn from_sizes<I: IntoIterator<Item = u64>>(sizes: I) -> Result<Self, Error> {
        let mut counts = BTreeMap::new();
        let mut total = 0_u64;
        for size in sizes {
            if size == 0 {
                return Err(Error::NonPositiveObservation(0));
            }
            *counts.entry(size).or_insert(0) += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { counts, total })
    }

    /// Build a dataset from `(size, count)` pairs; repeated sizes
    /// accumulate.
    ///
    /// # Errors
    ///
    /// [`Error::NonPositiveObservation`] on a zero size or zero count,
    /// [`Error::EmptyDataset`] when no pairs are supplied.
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Result<Self, Error> {
        let mut counts = BTreeMap::new();
        let mut total = 0_u64;
        for (size, count) in pairs {
            if size == 0 || count == 0 {
                return Err(Error::NonPositiveObservation(size.min(count)));
            }
            *counts.entry(size).or_insert(0) += count;
            total += count;
        }
        if total == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { counts, total })
    }

    /// Histogram view, sorted by size.
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Total number of observations.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Largest observed size.
    pub fn max_size(&self) -> u64 {
        *self.counts.keys().next_back().expect("dataset is non-empty")
    }

    /// Number of distinct observed sizes.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    /// Fitted coupling strength.
    pub alpha_hat: f64,
    /// System size the likelihood was evaluated under.
    pub n_used: u64,
    /// Grid-selected system size, when the fit estimated `N` jointly.
    pub n_estimated: Option<u64>,
    /// Log-likelihood at the reported optimum.
    pub log_likelihood: f64,
    /// Golden-section iterations spent (largest count across the grid for
    /// joint fits).
    pub iterations: u32,
    /// Whether the bracket shrank below the tolerance within the iteration
    /// cap.
    pub converged: bool,
    /// Whether the optimum landed against an end of the search interval
    /// (within ten epsilon), signalling that the data pushes `alpha` outside
    /// the open parameter space.
    pub at_boundary: bool,
}

/// Log-likelihood of a dataset under `(alpha, n)`:
/// `sum_size count(size) * ln P(size)`.
///
/// # Errors
///
/// [`Error::SizeExceedsSystem`] when any observed size exceeds `n` (such a
/// size has zero probability, so the likelihood is identically zero and the
/// parameters are inadmissible rather than merely poor).
pub fn log_likelihood(params: &AbelianParams, data: &SizeDataset) -> Result<f64, Error> {
    if data.max_size() > params.n() {
        return Err(Error::SizeExceedsSystem {
            size: data.max_size(),
            n: params.n(),
        });
    }
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for (&size, &count) in data.counts() {
        let term = count as f64 * params.log_pmf(size);
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Maximum-likelihood fit of `alpha` for a fixed system size `n`.
///
/// A 64-point scan of `[epsilon, 1 - epsilon]` locates the global coarse
/// maximum; golden-section search then refines inside the two neighbouring
/// scan points until the bracket is narrower than `tol` (or the iteration
/// cap is reached, reported via [`FitReport::converged`]).
///
/// # Errors
///
/// [`Error::SizeExceedsSystem`] when the data cannot arise under `n`;
/// [`Error::InvalidTolerance`] for a non-positive `tol`.
pub fn fit_alpha(data: &SizeDataset, n: u64, tol: f64) -> Result<FitReport, Error> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidTolerance {
            what: "tolerance",
            value: tol,
        });
    }
    if data.max_size() > n {
        return Err(Error::SizeExceedsSystem {
            size: data.max_size(),
            n,
        });
    }

    let eval = |alpha: f64| -> f64 {
        let params = AbelianParams::new(alpha, n).expect("search stays inside (0, 1)");
        log_likelihood(&params, data).expect("sizes were validated against n")
    };

    let lo = ALPHA_EPSILON;
    let hi = 1.0 - ALPHA_EPSILON;

    // Coarse guard scan.
    let step = (hi - lo) / (GUARD_GRID_POINTS - 1) as f64;
    let mut best_idx = 0;
    let mut best_ll = f64::NEG_INFINITY;
    for j in 0..GUARD_GRID_POINTS {
        let ll = eval(lo + j as f64 * step);
        if ll > best_ll {
            best_ll = ll;
            best_idx = j;
        }
    }
    let mut a = lo + best_idx.saturating_sub(1) as f64 * step;
    let mut b = (lo + (best_idx + 1) as f64 * step).min(hi);

    // Golden-section refinement (maximization).
    const INV_PHI2: f64 = 0.381_966_011_250_105_2; // (3 - sqrt 5) / 2
    let mut x1 = a + INV_PHI2 * (b - a);
    let mut x2 = b - INV_PHI2 * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    let mut iterations = 0_u32;
    while b - a > tol && iterations < MAX_GOLDEN_ITERATIONS {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_PHI2 * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - INV_PHI2 * (b - a);
            f2 = eval(x2);
        }
        iterations += 1;
    }

    let alpha_hat = 0.5 * (a + b);
    Ok(FitReport {
        alpha_hat,
        n_used: n,
        n_estimated: None,
        log_likelihood: eval(alpha_hat),
        iterations,
        converged: b - a <= tol,
        at_boundary: alpha_hat <= lo + BOUNDARY_MARGIN || alpha_hat >= hi - BOUNDARY_MARGIN,
    })
}

/// Joint maximum-likelihood fit of `(alpha, N)` over the integer grid
/// `n_lo..=n_hi`.
///
/// Profiles `alpha` at every candidate size and keeps the highest profile
/// likelihood; exact ties go to the smaller `N`. Candidates below the
/// largest observed size assign the data probability zero (likelihood
/// negative infinity), so they are skipped rather than fitted. The returned
/// report has [`FitReport::n_estimated`] set.
///
/// # Errors
///
/// [`Error::InvalidSizeGrid`] when the grid is empty or lies entirely below
/// the largest observed size (no candidate can explain the data);
/// [`Error::InvalidTolerance`] for a non-positive `tol`.
pub fn fit_joint(data: &SizeDataset, n_lo: u64, n_hi: u64, tol: f64) -> Result<FitReport, Error> {
    if n_lo > n_hi || data.max_size() > n_hi {
        return Err(Error::InvalidSizeGrid {
            lo: n_lo,
            hi: n_hi,
            max_size: data.max_size(),
        });
    }
    let mut best: Option<FitReport> = None;
    let mut max_iterations = 0_u32;
    for n in n_lo.max(data.max_size())..=n_hi {
        let report = fit_alpha(data, n, tol)?;
        max_iterations = max_iterations.max(report.iterations);
        let better = match &best {
            None => true,
            Some(current) => report.log_likelihood > current.log_likelihood,
        };
        if better {
            best = Some(report);
        }
    }
    let mut report = best.expect("grid is non-empty");
    report.n_estimated = Some(report.n_used);
    report.iterations = max_iterations;
    Ok(report)
}
