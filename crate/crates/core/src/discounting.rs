//! Discount bookkeeping: `β_t = 1/(α_1···α_{t-1})`, `B_t = Σ_{τ≤t} β_τ`, the
//! discounted-loss recursion and the square-root-sum inequality used by the
//! time-varying learning rates.
//!
//! `β_t` itself overflows on long, heavily discounted runs, so the ledger
//! also carries `ln β_t` and the ratio `B_t/β_t` through the stable recursion
//! `B_t/β_t = α_{t-1} B_{t-1}/β_{t-1} + 1`. Every bound in this crate depends
//! only on `B_t/β_t` and `β_τ/β_t`.

use crate::error::{Error, Result};

/// Running discount state after `t` advances.
///
/// The α announced before the first step multiplies zero history and is
/// ignored: `β_1 = 1` regardless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountLedger {
    t: usize,
    beta: f64,
    log_beta: f64,
    big_b: f64,
    b_over_beta: f64,
    last_alpha: f64,
    rate_scale: Option<f64>,
    eta: f64,
    s_acc: f64,
}

impl Default for DiscountLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl DiscountLedger {
    /// An empty ledger at `t = 0`.
    pub fn new() -> Self {
        Self {
            t: 0,
            beta: 1.0,
            log_beta: 0.0,
            big_b: 0.0,
            b_over_beta: 0.0,
            last_alpha: 1.0,
            rate_scale: None,
            eta: 0.0,
            s_acc: 0.0,
        }
    }

    /// An empty ledger tracking the learning rate `η_t = a √(β_t/B_t)` and the
    /// accumulator `s_t = (1/β_t) Σ_{τ≤t} β_τ η_τ`.
    pub fn with_learning_rate(a: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning-rate scale must be finite and non-negative, got {a}"
            )));
        }
        Ok(Self {
            rate_scale: Some(a),
            ..Self::new()
        })
    }

    /// Moves to step `t + 1` after the accountant announces `alpha`.
    pub fn advance(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let mut next = *self;
        next.t += 1;
        if self.t == 0 {
            next.beta = 1.0;
            next.log_beta = 0.0;
            next.big_b = 1.0;
            next.b_over_beta = 1.0;
        } else {
            next.beta = self.beta / alpha;
            next.log_beta = self.log_beta - alpha.ln();
            next.big_b = self.big_b + next.beta;
            next.b_over_beta = alpha * self.b_over_beta + 1.0;
        }
        next.last_alpha = alpha;
        if let Some(a) = self.rate_scale {
            next.eta = a / next.b_over_beta.sqrt();
            let carried = if self.t == 0 { 0.0 } else { alpha * self.s_acc };
            next.s_acc = carried + next.eta;
        }
        Ok(next)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// `β_t`; may be `+inf` for extreme discounting, use [`Self::log_beta`].
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_beta(&self) -> f64 {
        self.log_beta
    }

    /// `B_t` accumulated directly.
    pub fn big_b(&self) -> f64 {
        self.big_b
    }

    /// `B_t/β_t`, the largest possible discounted loss of a `[0,1]` loss.
    pub fn b_over_beta(&self) -> f64 {
        self.b_over_beta
    }

    /// The discount factor announced for the current step.
    pub fn last_alpha(&self) -> f64 {
        self.last_alpha
    }

    pub fn rate_scale(&self) -> Option<f64> {
        self.rate_scale
    }

    /// `η_t` (zero when no learning rate is attached or `t = 0`).
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `s_t = (1/β_t) Σ_{τ≤t} β_τ η_τ`.
    pub fn s_acc(&self) -> f64 {
        self.s_acc
    }

    /// `β_t/B_t` for a learning rate built on this ledger.
    pub fn beta_over_b(&self) -> f64 {
        if self.t == 0 {
            0.0
        } else {
            1.0 / self.b_over_beta
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDiscount { alpha })
    }
}

/// One step of the discounted-loss recursion `L_t = α L_{t-1} + l_t`.
pub fn accumulate(prev_loss: f64, alpha: f64, step_loss: f64) -> f64 {
    alpha * prev_loss + step_loss
}

/// Both sides of `(1/β_T) Σ β_t √(β_t/B_t) ≤ 2 √(B_T/β_T)` for a non-decreasing
/// sequence starting at or above one.
pub fn rate_sum_sides(betas: &[f64]) -> Result<(f64, f64)> {
    let Some(&last) = betas.last() else {
        return Err(Error::InvalidBetaSequence("empty sequence".into()));
    };
    if !(betas[0] >= 1.0) {
        return Err(Error::InvalidBetaSequence(format!(
            "first element {} is below 1",
            betas[0]
        )));
    }
    if let Some(w) = betas.windows(2).find(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidBetaSequence(format!(
            "sequence decreases from {} to {}",
            w[0], w[1]
        )));
    }
    let mut big_b = 0.0;
    let mut weighted = 0.0;
    for &beta in betas {
        big_b += beta;
        weighted += beta * (beta / big_b).sqrt();
    }
    Ok((weighted / last, 2.0 * (big_b / last).sqrt()))
}

/// `β_t` for each step of an α sequence, where `alphas[t-1]` is the factor
/// announced before step `t` (the first is ignored).
pub fn betas_from_alphas(alphas: &[f64]) -> Result<Vec<f64>> {
    let mut ledger = DiscountLedger::new();
    alphas
        .iter()
        .map(|&a| {
            ledger = ledger.advance(a)?;
            Ok(ledger.beta())
        })
        .collect()
}

/// `ln β_t` for each step, safe for arbitrarily long runs.
pub fn log_betas_from_alphas(alphas: &[f64]) -> Result<Vec<f64>> {
    let mut ledger = DiscountLedger::new();
    alphas
        .iter()
        .map(|&a| {
            ledger = ledger.advance(a)?;
            Ok(ledger.log_beta())
        })
        .collect()
}
