//! Avalanche-size distribution toolkit.
//!
//! This crate implements the abelian distribution: the distribution of
//! avalanche sizes `L` in a fully connected network of `N` integrate-and-fire
//! units with conservative coupling `alpha`,
//!
//! ```text
//! P(L) = C(alpha, N) * binom(N, L) * (L alpha / N)^(L-1) * (1 - L alpha / N)^(N-L-1)
//! ```
//!
//! on the support `{1, ..., N}`, with
//! `C(alpha, N) = (1 - alpha) / (N - (N-1) alpha)`.
//!
//! The crate is organized in five layers:
//!
//! * [`distribution`] — validated parameters, log-space mass evaluation,
//!   tabulated CDF/quantile, moments, and the closed-form mean
//!   `N / (N - (N-1) alpha)`.
//! * [`exact`] — arbitrary-precision rational verification of the
//!   combinatorial identities that prove normalization and the closed-form
//!   mean, plus an exact mass function for oracle use.
//! * [`sampling`] — seeded, reproducible avalanche-size generation via
//!   inverse-CDF search or the Walker–Vose alias method, with goodness-of-fit
//!   diagnostics.
//! * [`estimation`] — maximum-likelihood fitting of `alpha` (golden-section
//!   on the profile likelihood) and of `(alpha, N)` jointly (integer grid).
//! * [`criticality`] — the monotone/non-monotone regime boundary
//!   `alpha_crit(N)`, log-log curvature analysis of the mass function, the
//!   curvature-transition region, finite-size scaling against
//!   `1 - 1/sqrt(N)`, and power-law tail-exponent estimation.

pub mod criticality;
pub mod distribution;
pub mod error;
pub mod estimation;
pub mod exact;
pub mod sampling;
pub mod special;

pub use crate::distribution::{AbelianParams, LogProbTable, DEFAULT_TABLE_CAPACITY};
pub use crate::error::Error;
