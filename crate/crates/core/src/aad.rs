//! Aggregating Algorithm with Discounting.
//!
//! Weights are kept in log space as `ln w_t^k`, with `w_0^k = 1`, and the
//! prior `p_k` enters only when mixing. The update
//!
//! ```text
//! ln w_t^k = α_{t-1} ln w_{t-1}^k + η λ(γ_t, ω_t)/c - η λ(γ_t^k, ω_t)
//! ```
//!
//! keeps the identity `ln w_t^k = η (L_t/c - L_t^k)` and the invariant
//! `Σ_k p_k w_t^k ≤ 1`, which together give `L_t ≤ c L_t^k + (c/η) ln(1/p_k)`.

use crate::aggregator::Aggregator;
use crate::discounting::{accumulate, check_alpha};
use crate::error::{Error, Result};
use crate::games::{GameSpec, GeneralizedPrediction, Mixability};
use crate::numeric::log_sum_exp_iter;

/// Tolerance of the `Σ p_k w_k ≤ 1` check performed after each update.
pub const WEIGHT_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AadState {
    game: GameSpec,
    mix: Mixability,
    log_priors: Vec<f64>,
    log_weights: Vec<f64>,
    learner_loss: f64,
    expert_losses: Vec<f64>,
    t: usize,
    strict: bool,
}

impl AadState {
    /// Starts a run with the given prior weights (a probability vector with
    /// strictly positive entries).
    pub fn new(game: GameSpec, priors: &[f64]) -> Result<Self> {
        let mix = game
            .mixability_constants()
            .ok_or_else(|| Error::UnsupportedGame {
                engine: "aggregating algorithm",
                reason: format!(
                    "{:?} loss has no mixability constants with c = 1",
                    game.kind()
                ),
            })?;
        if priors.is_empty() {
            return Err(Error::InvalidPriors(
                "at least one expert is required".into(),
            ));
        }
        if let Some(p) = priors.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidPriors(format!(
                "prior weight {p} is not positive"
            )));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPriors(format!(
                "priors sum to {total}, not 1"
            )));
        }
        let k = priors.len();
        Ok(Self {
            game,
            mix,
            log_priors: priors.iter().map(|p| p.ln()).collect(),
            log_weights: vec![0.0; k],
            learner_loss: 0.0,
            expert_losses: vec![0.0; k],
            t: 0,
            strict: true,
        })
    }

    pub fn uniform(game: GameSpec, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPriors(
                "at least one expert is required".into(),
            ));
        }
        Self::new(game, &vec![1.0 / k as f64; k])
    }

    /// When disabled, `update` no longer fails on a broken weight invariant,
    /// so that corrupted runs can be inspected by an external audit.
    pub fn set_strict(&mut self, strict: bool) {
        self.strict = strict;
    }

    pub fn game(&self) -> &GameSpec {
        &self.game
    }

    pub fn mixability(&self) -> Mixability {
        self.mix
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_priors
    }

    /// Adds `delta` to one log-weight. Breaks the algorithm's invariants;
    /// exists to exercise auditing.
    pub fn perturb_log_weight(&mut self, expert: usize, delta: f64) {
        self.log_weights[expert] += delta;
    }

    /// Generalized prediction `g_t(ω) = -(c/η) ln Σ_k p_k (w_{t-1}^k)^α e^{-η λ(γ_t^k, ω)}`.
    pub fn generalized(&self, alpha: f64, expert_preds: &[f64]) -> Result<GeneralizedPrediction> {
        check_alpha(alpha)?;
        self.check_count(expert_preds)?;
        let mixed: Vec<f64> = self
            .log_priors
            .iter()
            .zip(&self.log_weights)
            .map(|(&lp, &lw)| lp + scale_log(alpha, lw))
            .collect();
        self.game.mixture(self.mix, &mixed, expert_preds)
    }

    /// `ln Σ_k p_k w_t^k`; non-positive while the algorithm is intact.
    pub fn log_weight_sum(&self) -> f64 {
        log_sum_exp_iter(
            self.log_priors
                .iter()
                .zip(&self.log_weights)
                .map(|(p, w)| p + w),
        )
    }

    pub fn weight_sum(&self) -> f64 {
        self.log_weight_sum().exp()
    }

    /// Largest `|ln w_t^k - η (L_t/c - L_t^k)|` over experts with finite loss.
    pub fn identity_gap(&self) -> f64 {
        let Mixability { c, eta } = self.mix;
        self.log_weights
            .iter()
            .zip(&self.expert_losses)
            .filter(|(_, l)| l.is_finite())
            .map(|(&lw, &lk)| (lw - eta * (self.learner_loss / c - lk)).abs())
            .fold(0.0, f64::max)
    }

    /// `c L_t^k + (c/η) ln(1/p_k)`.
    pub fn bound(&self, expert: usize) -> f64 {
        let Mixability { c, eta } = self.mix;
        c * self.expert_losses[expert] - (c / eta) * self.log_priors[expert]
    }

    pub fn bounds(&self) -> Vec<f64> {
        (0..self.num_experts()).map(|k| self.bound(k)).collect()
    }

    fn check_count(&self, expert_preds: &[f64]) -> Result<()> {
        if expert_preds.len() != self.log_weights.len() {
            return Err(Error::ExpertCountMismatch {
                expected: self.log_weights.len(),
                actual: expert_preds.len(),
            });
        }
        Ok(())
    }
}

/// `α · ln w`, keeping `-inf` weights at `-inf`.
fn scale_log(alpha: f64, log_w: f64) -> f64 {
    if log_w == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        alpha * log_w
    }
}

impl Aggregator for AadState {
    fn num_experts(&self) -> usize {
        self.log_weights.len()
    }

    fn predict(&self, alpha: f64, expert_preds: &[f64]) -> Result<f64> {
        let g = self.generalized(alpha, expert_preds)?;
        // A weight total above one only arises from corrupted state; shifting
        // g keeps the prediction defined and the update check reports it.
        let log_total = log_sum_exp_iter(
            self.log_priors
                .iter()
                .zip(&self.log_weights)
                .map(|(&lp, &lw)| lp + scale_log(alpha, lw)),
        );
        if log_total > 0.0 {
            let Mixability { c, eta } = self.mix;
            return self.game.substitute(&g.shifted((c / eta) * log_total));
        }
        self.game.substitute(&g)
    }

    fn update(
        &mut self,
        alpha: f64,
        expert_preds: &[f64],
        learner_pred: f64,
        outcome: f64,
    ) -> Result<()> {
        check_alpha(alpha)?;
        self.check_count(expert_preds)?;
        let Mixability { c, eta } = self.mix;
        let learner_step = self.game.loss(learner_pred, outcome)?;
        let expert_steps = expert_preds
            .iter()
            .map(|&p| self.game.loss(p, outcome))
            .collect::<Result<Vec<_>>>()?;

        let log_weights: Vec<f64> = self
            .log_weights
            .iter()
            .zip(&expert_steps)
            .map(|(&lw, &lk)| {
                if lk == f64::INFINITY || lw == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    alpha * lw + eta * (learner_step / c - lk)
                }
            })
            .collect();

        let log_sum =
            log_sum_exp_iter(self.log_priors.iter().zip(&log_weights).map(|(p, w)| p + w));
        if self.strict && !(log_sum <= WEIGHT_CHECK_TOL.ln_1p()) {
            return Err(Error::Consistency(format!(
                "weight invariant broken at step {}: sum of prior-weighted weights is {}",
                self.t + 1,
                log_sum.exp()
            )));
        }

        self.log_weights = log_weights;
        self.learner_loss = accumulate(self.learner_loss, alpha, learner_step);
        for (l, step) in self.expert_losses.iter_mut().zip(expert_steps) {
            *l = accumulate(*l, alpha, step);
        }
        self.t += 1;
        Ok(())
    }

    fn learner_loss(&self) -> f64 {
        self.learner_loss
    }

    fn expert_losses(&self) -> &[f64] {
        &self.expert_losses
    }
}

/// Normalizes non-negative raw weights into a probability vector.
pub fn normalized_priors(raw: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    if raw.is_empty() || !(total > 0.0 && total.is_finite()) || raw.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidPriors(format!(
            "cannot normalize weights with sum {total}"
        )));
    }
    Ok(raw.iter().map(|w| w / total).collect())
}

/// Priors proportional to `1/a²` over a parameter grid, as used when mixing
/// regression strategies with different ridge parameters.
pub fn inverse_square_priors(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter(
            "grid values must be positive".into(),
        ));
    }
    normalized_priors(&grid.iter().map(|a| 1.0 / (a * a)).collect::<Vec<_>>())
}
