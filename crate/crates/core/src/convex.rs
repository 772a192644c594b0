//! Exponential weighting with a time-varying learning rate for bounded convex
//! games.
//!
//! Losses are divided by the game's maximal loss so that they lie in `[0,1]`;
//! every loss and bound reported by [`ConvexAggState`] is in these scaled
//! units. With `η_t = a √(β_t/B_t)` and `ρ_t = α_{t-1} η_t/η_{t-1} ≤ 1` the
//! log-weights follow
//!
//! ```text
//! ln w_t^k = ρ_t ln w_{t-1}^k + η_t (λ(γ_t,ω_t) - λ(γ_t^k,ω_t)) - η_t²/8
//! ```
//!
//! and the learner predicts the `softmax(ρ_t ln w_{t-1})`-weighted average of
//! the experts' predictions.

use crate::aggregator::Aggregator;
use crate::discounting::{accumulate, check_alpha, DiscountLedger};
use crate::error::{Error, Result};
use crate::games::GameSpec;
use crate::numeric::{log_sum_exp, log_sum_exp_iter, softmax};

/// Tolerance for the post-hoc check that the prediction's loss is dominated
/// by the weighted expert losses.
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexAggState {
    game: GameSpec,
    scale: f64,
    a: f64,
    ledger: DiscountLedger,
    log_weights: Vec<f64>,
    learner_loss: f64,
    expert_losses: Vec<f64>,
    last_rho: f64,
    strict: bool,
}

/// The default learning-rate scale `2 √(ln K)`.
pub fn default_rate_scale(k: usize) -> f64 {
    2.0 * (k as f64).ln().sqrt()
}

/// `η_t = a √(β_t/B_t)` for a ledger already advanced to step `t`.
pub fn conv_learning_rate(ledger: &DiscountLedger, a: f64) -> f64 {
    a * ledger.beta_over_b().sqrt()
}

/// Regret bound `(ln K/a + a/4) √(B_t/β_t)`, which is `√(ln K) √(B_t/β_t)`
/// for the default `a`.
pub fn conv_bound(b_over_beta: f64, k: usize, a: f64) -> f64 {
    let ln_k = (k as f64).ln();
    let lead = if ln_k == 0.0 { 0.0 } else { ln_k / a };
    (lead + a / 4.0) * b_over_beta.sqrt()
}

/// `(-η Σ w λ + η²/8) - ln Σ w e^{-η λ}`, non-negative for probability
/// weights and losses in `[0,1]`.
pub fn hoeffding_gap(weights: &[f64], losses: &[f64], eta: f64) -> f64 {
    let mean: f64 = weights.iter().zip(losses).map(|(w, l)| w * l).sum();
    let lhs = log_sum_exp_iter(
        weights
            .iter()
            .zip(losses)
            .filter(|(&w, _)| w > 0.0)
            .map(|(w, l)| w.ln() - eta * l),
    );
    -eta * mean + eta * eta / 8.0 - lhs
}

impl ConvexAggState {
    /// Starts a run over `k` experts with `a = 2 √(ln K)`.
    pub fn new(game: GameSpec, k: usize) -> Result<Self> {
        Self::with_rate_scale(game, k, default_rate_scale(k))
    }

    pub fn with_rate_scale(game: GameSpec, k: usize, a: f64) -> Result<Self> {
        let scale = game.max_loss().ok_or_else(|| Error::UnsupportedGame {
            engine: "convex aggregation",
            reason: format!("{:?} loss is unbounded", game.kind()),
        })?;
        if k == 0 {
            return Err(Error::InvalidParameter(
                "at least one expert is required".into(),
            ));
        }
        if k > 1 && a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "learning-rate scale must be positive, got {a}"
            )));
        }
        Ok(Self {
            game,
            scale,
            a,
            ledger: DiscountLedger::with_learning_rate(a)?,
            log_weights: vec![0.0; k],
            learner_loss: 0.0,
            expert_losses: vec![0.0; k],
            last_rho: 1.0,
            strict: true,
        })
    }

    pub fn set_strict(&mut self, strict: bool) {
        self.strict = strict;
    }

    pub fn game(&self) -> &GameSpec {
        &self.game
    }

    /// Factor dividing raw losses.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rate_scale(&self) -> f64 {
        self.a
    }

    pub fn ledger(&self) -> &DiscountLedger {
        &self.ledger
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `α_{t-1} η_t/η_{t-1}` used by the last update.
    pub fn last_rho(&self) -> f64 {
        self.last_rho
    }

    pub fn perturb_log_weight(&mut self, expert: usize, delta: f64) {
        self.log_weights[expert] += delta;
    }

    /// Ledger and exponent `ρ` for the step announced with `alpha`.
    fn step(&self, alpha: f64) -> Result<(DiscountLedger, f64)> {
        let next = self.ledger.advance(alpha)?;
        let rho = if self.ledger.eta() > 0.0 {
            alpha * next.eta() / self.ledger.eta()
        } else {
            1.0
        };
        Ok((next, rho))
    }

    /// Normalized weights `w̃ ∝ (w_{t-1}^k)^ρ` for the coming step.
    pub fn mixing_weights(&self, alpha: f64) -> Result<Vec<f64>> {
        let (_, rho) = self.step(alpha)?;
        Ok(softmax(
            &self
                .log_weights
                .iter()
                .map(|lw| rho * lw)
                .collect::<Vec<_>>(),
        ))
    }

    /// The same weights computed from discounted losses alone,
    /// `w̃ ∝ exp(-α η_t L_{t-1}^k)`.
    pub fn loss_based_weights(&self, alpha: f64) -> Result<Vec<f64>> {
        let (next, _) = self.step(alpha)?;
        let eta = next.eta();
        Ok(softmax(
            &self
                .expert_losses
                .iter()
                .map(|l| -alpha * eta * l)
                .collect::<Vec<_>>(),
        ))
    }

    /// Largest excess of `λ(γ,ω)` over `Σ w̃_k λ(γ^k,ω)` at the sample outcomes,
    /// in scaled units.
    pub fn dominance_violation(&self, gamma: f64, weights: &[f64], expert_preds: &[f64]) -> f64 {
        self.game
            .sample_points()
            .into_iter()
            .map(|omega| {
                let mixed: f64 = weights
                    .iter()
                    .zip(expert_preds)
                    .map(|(w, &p)| w * self.game.loss_unchecked(p, omega))
                    .sum();
                (self.game.loss_unchecked(gamma, omega) - mixed) / self.scale
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|ln w_t^k - (η_t (L_t - L_t^k) - η_t s_t/8)|`.
    pub fn identity_gap(&self) -> f64 {
        let eta = self.ledger.eta();
        let s = self.ledger.s_acc();
        self.log_weights
            .iter()
            .zip(&self.expert_losses)
            .map(|(&lw, &lk)| (lw - (eta * (self.learner_loss - lk) - eta * s / 8.0)).abs())
            .fold(0.0, f64::max)
    }

    /// `ln Σ_k w_t^k / K`.
    pub fn log_weight_sum(&self) -> f64 {
        log_sum_exp(&self.log_weights) - (self.log_weights.len() as f64).ln()
    }

    /// Regret bound after the current step, in scaled units.
    pub fn bound(&self) -> f64 {
        if self.ledger.t() == 0 {
            return 0.0;
        }
        conv_bound(self.ledger.b_over_beta(), self.log_weights.len(), self.a)
    }

    fn check_predictions(&self, expert_preds: &[f64]) -> Result<()> {
        if expert_preds.len() != self.log_weights.len() {
            return Err(Error::ExpertCountMismatch {
                expected: self.log_weights.len(),
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

impl Aggregator for ConvexAggState {
    fn num_experts(&self) -> usize {
        self.log_weights.len()
    }

    fn predict(&self, alpha: f64, expert_preds: &[f64]) -> Result<f64> {
        self.check_predictions(expert_preds)?;
        let weights = self.mixing_weights(alpha)?;
        let gamma: f64 = weights.iter().zip(expert_preds).map(|(w, p)| w * p).sum();
        let gamma = gamma.clamp(self.game.y_lo(), self.game.y_hi());
        let violation = self.dominance_violation(gamma, &weights, expert_preds);
        if violation > DOMINANCE_TOL {
            return Err(Error::Consistency(format!(
                "weighted-average prediction {gamma} exceeds the mixed loss by {violation}"
            )));
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
        let (next, rho) = self.step(alpha)?;
        let eta = next.eta();
        let learner_step = self.game.loss(learner_pred, outcome)? / self.scale;
        let expert_steps = expert_preds
            .iter()
            .map(|&p| Ok(self.game.loss(p, outcome)? / self.scale))
            .collect::<Result<Vec<_>>>()?;

        let log_weights: Vec<f64> = self
            .log_weights
            .iter()
            .zip(&expert_steps)
            .map(|(&lw, &lk)| rho * lw + eta * (learner_step - lk) - eta * eta / 8.0)
            .collect();
        let log_mean = log_sum_exp(&log_weights) - (log_weights.len() as f64).ln();
        if self.strict && !(log_mean <= DOMINANCE_TOL.ln_1p()) {
            return Err(Error::Consistency(format!(
                "weight invariant broken at step {}: mean weight is {}",
                next.t(),
                log_mean.exp()
            )));
        }

        self.log_weights = log_weights;
        self.learner_loss = accumulate(self.learner_loss, alpha, learner_step);
        for (l, step) in self.expert_losses.iter_mut().zip(expert_steps) {
            *l = accumulate(*l, alpha, step);
        }
        self.ledger = next;
        self.last_rho = rho;
        Ok(())
    }

    fn learner_loss(&self) -> f64 {
        self.learner_loss
    }

    fn expert_losses(&self) -> &[f64] {
        &self.expert_losses
    }
}
