//! Online linear regression with discounting.
//!
//! The prediction for input `x_T` is `(b_{T-1} + m x_T)' A_T⁻¹ x_T` with
//! `m = (Y₁+Y₂)/2`, `A_T = aI + Σ_{t<T} (β_t/β_T) x_t x_t' + x_T x_T'` and
//! `b_{T-1} = Σ_{t<T} (β_t/β_T) y_t x_t`. The state stores both sums
//! normalized by `β_{T-1}`, so announcing `α_{T-1}` rescales them exactly.

use nalgebra::{DMatrix, DVector};

use super::linalg::spd_solve;
use super::{check_interval, check_ridge, check_y};
use crate::discounting::{accumulate, check_alpha, DiscountLedger};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinRegState {
    a: f64,
    y_lo: f64,
    y_hi: f64,
    /// `Σ_{t≤T-1} (β_t/β_{T-1}) x_t x_t'`.
    m: DMatrix<f64>,
    /// `Σ_{t≤T-1} (β_t/β_{T-1}) y_t x_t`.
    b: DVector<f64>,
    ledger: DiscountLedger,
    learner_loss: f64,
}

impl LinRegState {
    pub fn new(dim: usize, a: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        check_ridge(a)?;
        check_interval(y_lo, y_hi)?;
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "input dimension must be positive".into(),
            ));
        }
        Ok(Self {
            a,
            y_lo,
            y_hi,
            m: DMatrix::zeros(dim, dim),
            b: DVector::zeros(dim),
            ledger: DiscountLedger::new(),
            learner_loss: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn ridge(&self) -> f64 {
        self.a
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.y_lo, self.y_hi)
    }

    pub fn ledger(&self) -> &DiscountLedger {
        &self.ledger
    }

    /// Discounted square loss of the predictions so far.
    pub fn learner_loss(&self) -> f64 {
        self.learner_loss
    }

    /// Accumulated `Σ (β_t/β_{T-1}) x_t x_t'`.
    pub fn second_moment(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Accumulated `Σ (β_t/β_{T-1}) y_t x_t`.
    pub fn moment(&self) -> &DVector<f64> {
        &self.b
    }

    /// `A_T` for the coming step.
    pub fn system_matrix(&self, alpha: f64, x: &[f64]) -> Result<DMatrix<f64>> {
        check_alpha(alpha)?;
        let x = self.check_x(x)?;
        let n = self.dim();
        let mut a_t = &self.m * alpha + DMatrix::identity(n, n) * self.a;
        a_t.ger(1.0, &x, &x, 1.0);
        Ok(a_t)
    }

    pub fn predict(&self, alpha: f64, x: &[f64]) -> Result<f64> {
        let a_t = self.system_matrix(alpha, x)?;
        let x = DVector::from_column_slice(x);
        let z = spd_solve(&a_t, &x)?;
        let mid = 0.5 * (self.y_lo + self.y_hi);
        Ok((&self.b * alpha + &x * mid).dot(&z))
    }

    pub fn update(&mut self, alpha: f64, x: &[f64], y: f64, prediction: f64) -> Result<()> {
        check_y(y, self.y_lo, self.y_hi)?;
        let xv = self.check_x(x)?;
        self.ledger = self.ledger.advance(alpha)?;
        self.m *= alpha;
        self.m.ger(1.0, &xv, &xv, 1.0);
        self.b = &self.b * alpha + &xv * y;
        self.learner_loss = accumulate(self.learner_loss, alpha, (prediction - y).powi(2));
        Ok(())
    }

    fn check_x(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(DVector::from_column_slice(x))
    }
}
