use crate::error::Result;

/// Common step interface of the expert-advice learners.
///
/// A step is `predict` followed by `update` with the same `alpha` (the
/// discount factor announced before the step) and expert predictions, plus
/// the learner's prediction and the observed outcome.
pub trait Aggregator {
    fn num_experts(&self) -> usize;

    fn predict(&self, alpha: f64, expert_preds: &[f64]) -> Result<f64>;

    fn update(
        &mut self,
        alpha: f64,
        expert_preds: &[f64],
        learner_pred: f64,
        outcome: f64,
    ) -> Result<()>;

    /// Discounted learner loss `L_t`.
    fn learner_loss(&self) -> f64;

    /// Discounted expert losses `L_t^k`.
    fn expert_losses(&self) -> &[f64];
}
