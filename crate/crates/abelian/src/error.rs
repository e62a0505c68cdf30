//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parameter validation, table construction, estimation,
/// and criticality analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The coupling parameter must lie strictly inside the open interval (0, 1).
    #[error("coupling alpha must lie strictly inside (0, 1), got {0}")]
    AlphaOutOfRange(f64),

    /// The system size must be a positive integer.
    #[error("system size N must be at least 1, got {0}")]
    SystemSizeTooSmall(u64),

    /// An operation needed a larger system than the one supplied.
    #[error("{operation} requires N >= {min}, got {n}")]
    SystemSizeBelowMinimum {
        /// Name of the operation that rejected the system size.
        operation: &'static str,
        /// Smallest admissible system size for the operation.
        min: u64,
        /// The system size that was supplied.
        n: u64,
    },

    /// A probability table was requested beyond the configured capacity.
    #[error("table for N={n} exceeds the capacity limit of {max} entries")]
    TableCapacityExceeded {
        /// Requested system size.
        n: u64,
        /// Largest admissible system size.
        max: u64,
    },

    /// A probability argument fell outside [0, 1].
    #[error("probability argument must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),

    /// A rational evaluation point fell outside its admissible open interval.
    #[error("rational point x = {x} must lie strictly inside (0, 1/{n})")]
    RationalPointOutOfRange {
        /// Display form of the offending rational.
        x: String,
        /// System size fixing the admissible interval (0, 1/n).
        n: u64,
    },

    /// An observed avalanche size cannot occur under the given system size.
    #[error("observed size {size} exceeds the system size N = {n}")]
    SizeExceedsSystem {
        /// The offending observed size.
        size: u64,
        /// The system size it was checked against.
        n: u64,
    },

    /// An observed size or count was zero where a positive value is required.
    #[error("sizes and counts must be positive, got {0}")]
    NonPositiveObservation(u64),

    /// A dataset with no observations was supplied to an estimator.
    #[error("dataset contains no observations")]
    EmptyDataset,

    /// The integer grid for joint estimation was empty or excluded the data.
    #[error("size grid [{lo}, {hi}] is empty or lies below the largest observed size {max_size}")]
    InvalidSizeGrid {
        /// Lower end of the requested grid.
        lo: u64,
        /// Upper end of the requested grid.
        hi: u64,
        /// Largest size present in the dataset.
        max_size: u64,
    },

    /// A tolerance or step argument was not a positive finite number.
    #[error("{what} must be positive and finite, got {value}")]
    InvalidTolerance {
        /// Name of the offending argument.
        what: &'static str,
        /// The value that was supplied.
        value: f64,
    },

    /// The monotonicity predicate did not bracket a transition, so bisection
    /// cannot proceed. Carries the predicate value at both endpoints.
    #[error(
        "monotonicity predicate does not bracket a transition: \
         monotone={lo_monotone} at alpha={alpha_lo}, monotone={hi_monotone} at alpha={alpha_hi}"
    )]
    BracketNotTransitional {
        /// Lower bracket endpoint.
        alpha_lo: f64,
        /// Predicate value at the lower endpoint.
        lo_monotone: bool,
        /// Upper bracket endpoint.
        alpha_hi: f64,
        /// Predicate value at the upper endpoint.
        hi_monotone: bool,
    },

    /// A regression window held fewer support points than the fit requires.
    #[error("window [{lo}, {hi}] holds {points} support points, need at least {min}")]
    WindowTooNarrow {
        /// Lower end of the window.
        lo: u64,
        /// Upper end of the window.
        hi: u64,
        /// Number of usable support points in the window.
        points: u64,
        /// Minimum number of points the operation requires.
        min: u64,
    },
}
