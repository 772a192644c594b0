//! Regression strategies with different ridge parameters merged by the
//! aggregating algorithm with priors proportional to `1/a²`.

use super::kernel::{KernRegState, Kernel};
use super::linear::LinRegState;
use super::{check_interval, check_y};
use crate::aad::{inverse_square_priors, AadState};
use crate::aggregator::Aggregator;
use crate::error::{Error, Result};
use crate::games::GameSpec;

/// A single regression learner usable as an expert.
#[derive(Debug, Clone, PartialEq)]
pub enum RegStrategy {
    Linear(LinRegState),
    Kernel(KernRegState),
}

impl RegStrategy {
    pub fn predict(&self, alpha: f64, x: &[f64]) -> Result<f64> {
        match self {
            RegStrategy::Linear(s) => s.predict(alpha, x),
            RegStrategy::Kernel(s) => s.predict(alpha, x),
        }
    }

    pub fn update(&mut self, alpha: f64, x: &[f64], y: f64, prediction: f64) -> Result<()> {
        match self {
            RegStrategy::Linear(s) => s.update(alpha, x, y, prediction),
            RegStrategy::Kernel(s) => s.update(alpha, x, y, prediction),
        }
    }

    pub fn ridge(&self) -> f64 {
        match self {
            RegStrategy::Linear(s) => s.ridge(),
            RegStrategy::Kernel(s) => s.ridge(),
        }
    }

    pub fn learner_loss(&self) -> f64 {
        match self {
            RegStrategy::Linear(s) => s.learner_loss(),
            RegStrategy::Kernel(s) => s.learner_loss(),
        }
    }
}

/// The merged prediction together with each member's prediction, which the
/// following update needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPrediction {
    pub prediction: f64,
    pub members: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedRegression {
    members: Vec<RegStrategy>,
    aad: AadState,
    y_lo: f64,
    y_hi: f64,
}

impl MixedRegression {
    /// Linear strategies, one per ridge parameter in `grid`.
    pub fn linear(dim: usize, grid: &[f64], y_lo: f64, y_hi: f64) -> Result<Self> {
        let members = grid
            .iter()
            .map(|&a| Ok(RegStrategy::Linear(LinRegState::new(dim, a, y_lo, y_hi)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_members(members, y_lo, y_hi)
    }

    /// Kernel strategies, one per ridge parameter in `grid`.
    pub fn kernel(kernel: Kernel, dim: usize, grid: &[f64], y_lo: f64, y_hi: f64) -> Result<Self> {
        let members = grid
            .iter()
            .map(|&a| {
                Ok(RegStrategy::Kernel(KernRegState::new(
                    kernel, dim, a, y_lo, y_hi,
                )?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_members(members, y_lo, y_hi)
    }

    pub fn from_members(members: Vec<RegStrategy>, y_lo: f64, y_hi: f64) -> Result<Self> {
        check_interval(y_lo, y_hi)?;
        if members.is_empty() {
            return Err(Error::InvalidParameter("the ridge grid is empty".into()));
        }
        let grid: Vec<f64> = members.iter().map(RegStrategy::ridge).collect();
        let priors = inverse_square_priors(&grid)?;
        let aad = AadState::new(GameSpec::square(y_lo, y_hi)?, &priors)?;
        Ok(Self {
            members,
            aad,
            y_lo,
            y_hi,
        })
    }

    pub fn members(&self) -> &[RegStrategy] {
        &self.members
    }

    pub fn aggregator(&self) -> &AadState {
        &self.aad
    }

    pub fn learner_loss(&self) -> f64 {
        self.aad.learner_loss()
    }

    /// Discounted loss of each member strategy.
    pub fn member_losses(&self) -> &[f64] {
        self.aad.expert_losses()
    }

    /// `L_T^a + (Δ²/2) ln(1/p_a)`, the guarantee against member `index`.
    pub fn bound(&self, index: usize) -> f64 {
        self.aad.bound(index)
    }

    pub fn predict(&self, alpha: f64, x: &[f64]) -> Result<MixedPrediction> {
        let members = self
            .members
            .iter()
            .map(|m| m.predict(alpha, x))
            .collect::<Result<Vec<_>>>()?;
        let prediction = self.aad.predict(alpha, &members)?;
        Ok(MixedPrediction {
            prediction,
            members,
        })
    }

    pub fn update(&mut self, alpha: f64, x: &[f64], y: f64, step: &MixedPrediction) -> Result<()> {
        check_y(y, self.y_lo, self.y_hi)?;
        self.aad.update(alpha, &step.members, step.prediction, y)?;
        for (m, &p) in self.members.iter_mut().zip(&step.members) {
            m.update(alpha, x, y, p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_grid_reproduces_the_member() {
        let mut mixed = MixedRegression::linear(1, &[2.0], 0.0, 1.0).unwrap();
        let mut solo = LinRegState::new(1, 2.0, 0.0, 1.0).unwrap();
        for (x, y) in [(0.5, 0.2), (1.0, 0.9), (-0.3, 0.4)] {
            let step = mixed.predict(0.9, &[x]).unwrap();
            let g = solo.predict(0.9, &[x]).unwrap();
            assert!((step.prediction - g).abs() < 1e-12);
            mixed.update(0.9, &[x], y, &step).unwrap();
            solo.update(0.9, &[x], y, g).unwrap();
        }
    }

    #[test]
    fn two_member_prediction_lies_between_members() {
        let mut mixed = MixedRegression::linear(2, &[1.0, 4.0], 0.0, 1.0).unwrap();
        let stream = [
            ([1.0, 0.0], 1.0),
            ([0.2, 0.9], 0.3),
            ([0.8, 0.1], 0.9),
            ([0.5, 0.5], 0.6),
        ];
        for (x, y) in stream {
            let step = mixed.predict(0.8, &x).unwrap();
            let lo = step.members.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = step
                .members
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(step.prediction >= lo - 1e-12 && step.prediction <= hi + 1e-12);
            mixed.update(0.8, &x, y, &step).unwrap();
        }
        for k in 0..2 {
            assert!(mixed.learner_loss() <= mixed.bound(k) + 1e-9);
        }
    }
}
