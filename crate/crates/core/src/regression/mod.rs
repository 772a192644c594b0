//! Online regression under discounted square loss.
//!
//! [`LinRegState`] competes with all linear functions of the inputs,
//! [`KernRegState`] with an RKHS, and [`MixedRegression`] merges strategies
//! with different ridge parameters through the aggregating algorithm. The
//! bound evaluators in [`bounds`] are independent of the learners and are
//! what the audit compares against.

pub mod bounds;
pub mod kernel;
pub mod linalg;
pub mod linear;
pub mod mixed;

pub use bounds::{DetMode, DiscountedGram, Observation};
pub use kernel::{KernRegState, Kernel};
pub use linear::LinRegState;
pub use mixed::{MixedPrediction, MixedRegression, RegStrategy};

use crate::error::{Error, Result};

/// Default weight below which the kernel learner forgets an old point.
pub const DEFAULT_TRUNCATION: f64 = 1e-12;

pub(crate) fn check_interval(y_lo: f64, y_hi: f64) -> Result<()> {
    if !(y_lo.is_finite() && y_hi.is_finite() && y_lo < y_hi) {
        return Err(Error::InvalidGame(format!(
            "invalid outcome interval [{y_lo}, {y_hi}]"
        )));
    }
    Ok(())
}

pub(crate) fn check_ridge(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ridge parameter must be positive, got {a}"
        )));
    }
    Ok(())
}

pub(crate) fn check_y(y: f64, y_lo: f64, y_hi: f64) -> Result<()> {
    if !(y >= y_lo && y <= y_hi) {
        return Err(Error::OutcomeOutOfDomain { outcome: y });
    }
    Ok(())
}
