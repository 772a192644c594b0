//! Defensive forecasting with discounting for binary-outcome convex games.
//!
//! With `η_t = √(β_t/B_t)`, `s_t = α_{t-1} s_{t-1} + η_t` and regrets
//! `R^k = L - L^k`, the forecaster keeps
//!
//! ```text
//! C_t      = Σ_k (1/K) Σ_j (c/j²) exp(j α η_t R^k_{t-1} - j² η_t α s_{t-1}/2)
//! f_t(γ,ω) = Σ_k (1/K) Σ_j (c/j²) exp(j α η_t R^k_{t-1} - j² η_t α s_{t-1}/2)
//!                                 · exp(j η_t (λ(γ,ω) - λ(γ^k,ω)) - j² η_t²/2)
//! ```
//!
//! with `1/c = Σ_j 1/j²`, and predicts some `γ` with `f_t(γ,ω) ≤ C_t` for
//! both outcomes. Since `C_1 = 1` and `f_t(γ_t,ω_t)^{ρ} ≥ C_{t+1}`, the
//! threshold never exceeds one, which yields a bound against every
//! ε-quantile of the experts' losses.

use crate::aggregator::Aggregator;
use crate::discounting::{accumulate, check_alpha, DiscountLedger};
use crate::error::{Error, Result};
use crate::games::GameSpec;
use crate::numeric::LogSumExp;

/// `c` with `1/c = Σ_{j≥1} 1/j²`.
pub const C_NORM: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);

pub const DEFAULT_SERIES_LENGTH: usize = 50;

/// A series term below this fraction of the partial sum ends the series once
/// the terms are decreasing.
pub const SERIES_REL_TOL: f64 = 1e-14;

/// Bisection stops when the bracket is narrower than this.
pub const BISECTION_TOL: f64 = 1e-10;

/// Slack allowed in `f ≤ C` and `C ≤ 1`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FdfdState {
    game: GameSpec,
    scale: f64,
    series_length: usize,
    ledger: DiscountLedger,
    learner_loss: f64,
    expert_losses: Vec<f64>,
    last_f: Option<f64>,
    last_threshold: Option<f64>,
    strict: bool,
}

/// Per-step quantities shared by `f_t` and `C_t`.
struct Step {
    eta: f64,
    /// `j`-linear coefficient of the history exponent for each expert.
    regret: Vec<f64>,
    /// `j²`-coefficient of the history exponent.
    penalty: f64,
}

/// `2 √(r ln(1/ε)) + 7 √r` with `r = B_t/β_t`.
pub fn quantile_bound(b_over_beta: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1], got {epsilon}"
        )));
    }
    Ok(2.0 * (b_over_beta * (1.0 / epsilon).ln()).sqrt() + 7.0 * b_over_beta.sqrt())
}

/// Smallest value not exceeded by at least `εK` of the losses.
pub fn epsilon_quantile_loss(losses: &[f64], epsilon: f64) -> Result<f64> {
    if losses.is_empty() {
        return Err(Error::InvalidParameter("no expert losses".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1], got {epsilon}"
        )));
    }
    let mut sorted = losses.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((epsilon * losses.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(losses.len()) - 1])
}

impl FdfdState {
    pub fn new(game: GameSpec, k: usize) -> Result<Self> {
        Self::with_series_length(game, k, DEFAULT_SERIES_LENGTH)
    }

    pub fn with_series_length(game: GameSpec, k: usize, series_length: usize) -> Result<Self> {
        if !game.is_binary() {
            return Err(Error::UnsupportedGame {
                engine: "defensive forecasting",
                reason: "requires a binary outcome set".into(),
            });
        }
        let scale = game.max_loss().ok_or_else(|| Error::UnsupportedGame {
            engine: "defensive forecasting",
            reason: format!("{:?} loss is unbounded", game.kind()),
        })?;
        if k == 0 {
            return Err(Error::InvalidParameter(
                "at least one expert is required".into(),
            ));
        }
        if series_length == 0 {
            return Err(Error::InvalidParameter(
                "series length must be positive".into(),
            ));
        }
        Ok(Self {
            game,
            scale,
            series_length,
            ledger: DiscountLedger::with_learning_rate(1.0)?,
            learner_loss: 0.0,
            expert_losses: vec![0.0; k],
            last_f: None,
            last_threshold: None,
            strict: true,
        })
    }

    pub fn set_strict(&mut self, strict: bool) {
        self.strict = strict;
    }

    pub fn game(&self) -> &GameSpec {
        &self.game
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn ledger(&self) -> &DiscountLedger {
        &self.ledger
    }

    /// `f_t(γ_t, ω_t)` of the last completed step.
    pub fn last_f(&self) -> Option<f64> {
        self.last_f
    }

    /// `C_t` of the last completed step.
    pub fn last_threshold(&self) -> Option<f64> {
        self.last_threshold
    }

    /// Adds `delta` to the learner's discounted loss. Breaks the threshold
    /// invariants; exists to exercise auditing.
    pub fn perturb_learner_loss(&mut self, delta: f64) {
        self.learner_loss += delta;
    }

    fn step(&self, alpha: f64) -> Result<Step> {
        let next = self.ledger.advance(alpha)?;
        let eta = next.eta();
        let carried_s = next.s_acc() - eta;
        Ok(Step {
            eta,
            regret: self
                .expert_losses
                .iter()
                .map(|lk| alpha * eta * (self.learner_loss - lk))
                .collect(),
            penalty: eta * carried_s / 2.0,
        })
    }

    /// `ln Σ_k (1/K) Σ_j (c/j²) exp(j (r_k + x_k) - j² (p + q))` with the series
    /// cut adaptively.
    fn log_series(&self, step: &Step, extra: Option<(&[f64], f64)>) -> f64 {
        let mut total = LogSumExp::default();
        for (k, &r) in step.regret.iter().enumerate() {
            let (lin, quad) = match extra {
                Some((shift, q)) => (r + shift[k], step.penalty + q),
                None => (r, step.penalty),
            };
            if lin == 0.0 && quad == 0.0 {
                // Σ_j 1/j² in closed form; the truncated sum is too short here.
                total.push((std::f64::consts::PI.powi(2) / 6.0).ln());
                continue;
            }
            let mut partial = LogSumExp::default();
            let mut prev = f64::INFINITY;
            for j in 1..=self.series_length {
                let jf = j as f64;
                let term = -2.0 * jf.ln() + jf * lin - jf * jf * quad;
                partial.push(term);
                if term < prev && term < partial.value() + SERIES_REL_TOL.ln() {
                    break;
                }
                prev = term;
            }
            total.push(partial.value());
        }
        total.value() + C_NORM.ln() - (step.regret.len() as f64).ln()
    }

    fn log_f_at(&self, step: &Step, expert_preds: &[f64], gamma: f64, outcome: f64) -> f64 {
        let own = self.game.loss_unchecked(gamma, outcome) / self.scale;
        let shift: Vec<f64> = expert_preds
            .iter()
            .map(|&p| step.eta * (own - self.game.loss_unchecked(p, outcome) / self.scale))
            .collect();
        self.log_series(step, Some((&shift, step.eta * step.eta / 2.0)))
    }

    /// `C_t` for the step announced with `alpha`.
    pub fn threshold(&self, alpha: f64) -> Result<f64> {
        Ok(self.log_threshold(alpha)?.exp())
    }

    pub fn log_threshold(&self, alpha: f64) -> Result<f64> {
        let step = self.step(alpha)?;
        Ok(self.log_series(&step, None))
    }

    /// `f_t(γ, ω)` for the step announced with `alpha`.
    pub fn f_value(
        &self,
        alpha: f64,
        expert_preds: &[f64],
        gamma: f64,
        outcome: f64,
    ) -> Result<f64> {
        Ok(self.log_f(alpha, expert_preds, gamma, outcome)?.exp())
    }

    pub fn log_f(&self, alpha: f64, expert_preds: &[f64], gamma: f64, outcome: f64) -> Result<f64> {
        self.check_predictions(expert_preds)?;
        let outcome = self.game.check_outcome(outcome)?;
        let step = self.step(alpha)?;
        Ok(self.log_f_at(&step, expert_preds, gamma, outcome))
    }

    /// `ρ ln f_t(γ_t,ω_t) - ln C_{t+1}` with `ρ = α_t η_{t+1}/η_t`; non-negative
    /// while the forecaster is intact. `None` before the first step.
    pub fn monotonicity_gap(&self, alpha: f64) -> Result<Option<f64>> {
        let Some(f) = self.last_f else {
            return Ok(None);
        };
        let next = self.ledger.advance(alpha)?;
        let rho = alpha * next.eta() / self.ledger.eta();
        Ok(Some(rho * f.ln() - self.log_threshold(alpha)?))
    }

    fn check_predictions(&self, expert_preds: &[f64]) -> Result<()> {
        if expert_preds.len() != self.expert_losses.len() {
            return Err(Error::ExpertCountMismatch {
                expected: self.expert_losses.len(),
                actual: expert_preds.len(),
            });
        }
        let (lo, hi) = (self.game.y_lo(), self.game.y_hi());
        if let Some(&p) = expert_preds.iter().find(|&&p| !(p >= lo && p <= hi)) {
            return Err(Error::PredictionOutOfDomain { prediction: p });
        }
        Ok(())
    }
}

impl Aggregator for FdfdState {
    fn num_experts(&self) -> usize {
        self.expert_losses.len()
    }

    fn predict(&self, alpha: f64, expert_preds: &[f64]) -> Result<f64> {
        self.check_predictions(expert_preds)?;
        let step = self.step(alpha)?;
        let threshold = self.log_series(&step, None).exp();
        let (lo, hi) = (self.game.y_lo(), self.game.y_hi());
        let f_pair = |gamma: f64| {
            (
                self.log_f_at(&step, expert_preds, gamma, lo).exp(),
                self.log_f_at(&step, expert_preds, gamma, hi).exp(),
            )
        };
        let excess = |(a, b): (f64, f64)| a.max(b) - threshold;

        let at_lo = f_pair(lo);
        let at_hi = f_pair(hi);
        // f(γ, hi) - f(γ, lo) decreases in γ. Without a sign change one
        // endpoint minimizes the larger of the two values.
        let d_lo = at_lo.1 - at_lo.0;
        let d_hi = at_hi.1 - at_hi.0;
        if d_lo <= 0.0 || d_hi >= 0.0 {
            let (gamma, pair) = if at_hi.0.max(at_hi.1) < at_lo.0.max(at_lo.1) {
                (hi, at_hi)
            } else {
                (lo, at_lo)
            };
            let e = excess(pair);
            if e > FEASIBILITY_TOL {
                return Err(Error::NoFeasiblePrediction { excess: e });
            }
            return Ok(gamma);
        }
        let (mut a, mut b) = (lo, hi);
        while b - a > BISECTION_TOL {
            let m = 0.5 * (a + b);
            let (f0, f1) = f_pair(m);
            if f1 - f0 > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let gamma = 0.5 * (a + b);
        let e = excess(f_pair(gamma));
        if e > FEASIBILITY_TOL {
            return Err(Error::NoFeasiblePrediction { excess: e });
        }
        Ok(gamma)
    }

    fn update(
        &mut self,
        alpha: f64,
        expert_preds: &[f64],
        learner_pred: f64,
        outcome: f64,
    ) -> Result<()> {
        check_alpha(alpha)?;
        self.check_predictions(expert_preds)?;
        let outcome = self.game.check_outcome(outcome)?;
        let step = self.step(alpha)?;
        let threshold = self.log_series(&step, None).exp();
        let f = self
            .log_f_at(&step, expert_preds, learner_pred, outcome)
            .exp();
        if self.strict && threshold > 1.0 + FEASIBILITY_TOL {
            return Err(Error::Consistency(format!(
                "threshold {threshold} exceeds one at step {}",
                self.ledger.t() + 1
            )));
        }
        if self.strict && f > threshold + FEASIBILITY_TOL {
            return Err(Error::Consistency(format!(
                "f = {f} exceeds the threshold {threshold} at step {}",
                self.ledger.t() + 1
            )));
        }

        let learner_step = self.game.loss(learner_pred, outcome)? / self.scale;
        let expert_steps = expert_preds
            .iter()
            .map(|&p| Ok(self.game.loss(p, outcome)? / self.scale))
            .collect::<Result<Vec<_>>>()?;
        self.learner_loss = accumulate(self.learner_loss, alpha, learner_step);
        for (l, step) in self.expert_losses.iter_mut().zip(expert_steps) {
            *l = accumulate(*l, alpha, step);
        }
        self.ledger = self.ledger.advance(alpha)?;
        self.last_f = Some(f);
        self.last_threshold = Some(threshold);
        Ok(())
    }

    fn learner_loss(&self) -> f64 {
        self.learner_loss
    }

    fn expert_losses(&self) -> &[f64] {
        &self.expert_losses
    }
}
