//! Loss games: outcome sets, loss functions, mixability constants and
//! substitution functions.
//!
//! A game is the triple (outcomes, predictions, loss). Three games are
//! supported: square loss and absolute loss on a real interval (or on its two
//! endpoints), and log loss on `{0, 1}`. The prediction set of every game is
//! the closed interval `[y_lo, y_hi]`, except that square and absolute losses
//! also accept predictions outside it (regression strategies produce raw,
//! unclipped predictions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp_iter;

/// Number of outcome sample points used for interval games.
pub const INTERVAL_SAMPLES: usize = 11;

/// Slack allowed when checking `λ(σ(g), ω) ≤ g(ω)`.
pub const SUBSTITUTION_TOL: f64 = 1e-9;

/// Bracket width at which golden-section substitution is considered converged.
/// The search keeps shrinking past this down to floating-point resolution.
pub const GOLDEN_TOL: f64 = 1e-10;

const OUTCOME_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Square,
    Log,
    Absolute,
}

/// Whether outcomes range over the whole interval or only its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeSet {
    #[default]
    Interval,
    Binary,
}

/// Constants `(c, η)` for which the mixability condition holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixability {
    pub c: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameSpec {
    kind: GameKind,
    y_lo: f64,
    y_hi: f64,
    outcomes: OutcomeSet,
    mixability: Option<Mixability>,
}

impl GameSpec {
    pub fn new(kind: GameKind, y_lo: f64, y_hi: f64, outcomes: OutcomeSet) -> Result<Self> {
        if !(y_lo.is_finite() && y_hi.is_finite() && y_lo < y_hi) {
            return Err(Error::InvalidGame(format!(
                "outcome interval [{y_lo}, {y_hi}] must be finite with y_lo < y_hi"
            )));
        }
        if kind == GameKind::Log && (y_lo != 0.0 || y_hi != 1.0 || outcomes != OutcomeSet::Binary) {
            return Err(Error::InvalidGame(
                "log loss is defined only for binary outcomes {0, 1}".into(),
            ));
        }
        let span = y_hi - y_lo;
        let mixability = match kind {
            GameKind::Square => Some(Mixability {
                c: 1.0,
                eta: 2.0 / (span * span),
            }),
            GameKind::Log => Some(Mixability { c: 1.0, eta: 1.0 }),
            GameKind::Absolute => None,
        };
        Ok(Self {
            kind,
            y_lo,
            y_hi,
            outcomes,
            mixability,
        })
    }

    pub fn square(y_lo: f64, y_hi: f64) -> Result<Self> {
        Self::new(GameKind::Square, y_lo, y_hi, OutcomeSet::Interval)
    }

    pub fn absolute(y_lo: f64, y_hi: f64) -> Result<Self> {
        Self::new(GameKind::Absolute, y_lo, y_hi, OutcomeSet::Interval)
    }

    pub fn log() -> Self {
        Self::new(GameKind::Log, 0.0, 1.0, OutcomeSet::Binary).expect("log game is valid")
    }

    /// The same game restricted to the two endpoint outcomes.
    pub fn binary(mut self) -> Self {
        self.outcomes = OutcomeSet::Binary;
        self
    }

    /// Overrides the mixability constants.
    pub fn with_mixability(mut self, c: f64, eta: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite() && eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidGame(format!(
                "mixability constants need c >= 1 and eta > 0, got c={c}, eta={eta}"
            )));
        }
        self.mixability = Some(Mixability { c, eta });
        Ok(self)
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn y_lo(&self) -> f64 {
        self.y_lo
    }

    pub fn y_hi(&self) -> f64 {
        self.y_hi
    }

    pub fn span(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.y_lo + self.y_hi)
    }

    pub fn outcomes(&self) -> OutcomeSet {
        self.outcomes
    }

    pub fn is_binary(&self) -> bool {
        self.outcomes == OutcomeSet::Binary
    }

    /// All three games have a convex prediction set and a loss convex in the
    /// prediction.
    pub fn is_convex(&self) -> bool {
        true
    }

    /// Largest possible loss for predictions inside `[y_lo, y_hi]`, or `None`
    /// when the game is unbounded.
    pub fn max_loss(&self) -> Option<f64> {
        match self.kind {
            GameKind::Square => Some(self.span() * self.span()),
            GameKind::Absolute => Some(self.span()),
            GameKind::Log => None,
        }
    }

    pub fn mixability_constants(&self) -> Option<Mixability> {
        self.mixability
    }

    /// Validates an outcome and snaps it onto the outcome set.
    pub fn check_outcome(&self, outcome: f64) -> Result<f64> {
        let err = Error::OutcomeOutOfDomain { outcome };
        if !outcome.is_finite() {
            return Err(err);
        }
        match self.outcomes {
            OutcomeSet::Binary => {
                if (outcome - self.y_lo).abs() <= OUTCOME_EPS {
                    Ok(self.y_lo)
                } else if (outcome - self.y_hi).abs() <= OUTCOME_EPS {
                    Ok(self.y_hi)
                } else {
                    Err(err)
                }
            }
            OutcomeSet::Interval => {
                if outcome < self.y_lo - OUTCOME_EPS || outcome > self.y_hi + OUTCOME_EPS {
                    Err(err)
                } else {
                    Ok(outcome.clamp(self.y_lo, self.y_hi))
                }
            }
        }
    }

    /// Loss `λ(γ, ω)`. Log loss returns `+inf` for a boundary prediction
    /// paired with the opposite outcome.
    pub fn loss(&self, prediction: f64, outcome: f64) -> Result<f64> {
        let outcome = self.check_outcome(outcome)?;
        if !prediction.is_finite() {
            return Err(Error::PredictionOutOfDomain { prediction });
        }
        Ok(match self.kind {
            GameKind::Square => (prediction - outcome).powi(2),
            GameKind::Absolute => (prediction - outcome).abs(),
            GameKind::Log => {
                if !(0.0..=1.0).contains(&prediction) {
                    return Err(Error::PredictionOutOfDomain { prediction });
                }
                if outcome == self.y_hi {
                    -prediction.ln()
                } else {
                    -(1.0 - prediction).ln()
                }
            }
        })
    }

    /// Loss at a sample point already known to be a legal outcome.
    pub(crate) fn loss_unchecked(&self, prediction: f64, outcome: f64) -> f64 {
        match self.kind {
            GameKind::Square => (prediction - outcome).powi(2),
            GameKind::Absolute => (prediction - outcome).abs(),
            GameKind::Log => {
                if outcome == self.y_hi {
                    -prediction.ln()
                } else {
                    -(1.0 - prediction).ln()
                }
            }
        }
    }

    /// Outcomes at which generalized predictions are evaluated: the two
    /// endpoints for binary games, an evenly spaced grid including both
    /// endpoints for interval games.
    pub fn sample_points(&self) -> Vec<f64> {
        match self.outcomes {
            OutcomeSet::Binary => vec![self.y_lo, self.y_hi],
            OutcomeSet::Interval => linspace(self.y_lo, self.y_hi, INTERVAL_SAMPLES),
        }
    }

    /// Generalized prediction `g(ω) = -(c/η) ln Σ_k exp(ℓ_k - η λ(γ_k, ω))`
    /// over the sample points, where `ℓ_k` are log-weights (possibly `-inf`).
    pub fn mixture(
        &self,
        mix: Mixability,
        log_weights: &[f64],
        predictions: &[f64],
    ) -> Result<GeneralizedPrediction> {
        if log_weights.len() != predictions.len() {
            return Err(Error::ExpertCountMismatch {
                expected: log_weights.len(),
                actual: predictions.len(),
            });
        }
        for &p in predictions {
            self.check_prediction(p)?;
        }
        let points = self.sample_points();
        let values = points
            .iter()
            .map(|&omega| {
                let terms = log_weights
                    .iter()
                    .zip(predictions)
                    .map(move |(&lw, &gamma)| {
                        if lw == f64::NEG_INFINITY {
                            f64::NEG_INFINITY
                        } else {
                            lw - mix.eta * self.loss_unchecked(gamma, omega)
                        }
                    });
                -(mix.c / mix.eta) * log_sum_exp_iter(terms)
            })
            .collect();
        Ok(GeneralizedPrediction { points, values })
    }

    fn check_prediction(&self, prediction: f64) -> Result<()> {
        let ok = match self.kind {
            GameKind::Log => (0.0..=1.0).contains(&prediction),
            _ => prediction.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::PredictionOutOfDomain { prediction })
        }
    }

    /// Largest `λ(γ, ω) - g(ω)` over the domain of `g`.
    pub fn violation(&self, prediction: f64, g: &GeneralizedPrediction) -> f64 {
        g.iter()
            .map(|(omega, value)| excess(self.loss_unchecked(prediction, omega), value))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Substitution function: a legal prediction whose loss is dominated by
    /// `g` at every sample point.
    pub fn substitute(&self, g: &GeneralizedPrediction) -> Result<f64> {
        let g_lo = g.at(self.y_lo).ok_or_else(|| {
            Error::InvalidParameter("generalized prediction lacks the lower endpoint".into())
        })?;
        let g_hi = g.at(self.y_hi).ok_or_else(|| {
            Error::InvalidParameter("generalized prediction lacks the upper endpoint".into())
        })?;
        let gamma = match self.kind {
            GameKind::Square if g_lo.is_finite() && g_hi.is_finite() => {
                self.square_substitution(g_lo, g_hi)
            }
            _ => self.argmin_substitute(g),
        };
        let violation = self.violation(gamma, g);
        if violation > SUBSTITUTION_TOL || violation.is_nan() {
            return Err(Error::Infeasible { violation });
        }
        Ok(gamma)
    }

    /// Closed-form square-loss substitution
    /// `γ = (y_hi + y_lo)/2 - (g(y_hi) - g(y_lo)) / (2 (y_hi - y_lo))`.
    pub fn square_substitution(&self, g_lo: f64, g_hi: f64) -> f64 {
        self.midpoint() - (g_hi - g_lo) / (2.0 * self.span())
    }

    /// Minimizes `max_ω (λ(γ, ω) - g(ω))` over `[y_lo, y_hi]` by golden-section
    /// search; the objective is convex in `γ`.
    pub fn argmin_substitute(&self, g: &GeneralizedPrediction) -> f64 {
        let objective = |gamma: f64| self.violation(gamma, g);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (self.y_lo, self.y_hi);
        let floor = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = objective(x1);
        let mut f2 = objective(x2);
        // Run past GOLDEN_TOL down to floating-point resolution: steep losses
        // (log loss near 0 or 1) amplify the bracket width into the violation.
        let mut iterations = 0;
        while hi - lo > floor.min(GOLDEN_TOL) && iterations < 200 {
            iterations += 1;
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = objective(x1);
            } else if f1 > f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = objective(x2);
            } else {
                lo = x1;
                hi = x2;
                x1 = hi - inv_phi * (hi - lo);
                x2 = lo + inv_phi * (hi - lo);
                f1 = objective(x1);
                f2 = objective(x2);
            }
            if !(x1 < x2) {
                break;
            }
        }
        let mid = 0.5 * (lo + hi);
        let mut best = (mid, objective(mid));
        for edge in [self.y_lo, self.y_hi] {
            let v = objective(edge);
            if v < best.1 {
                best = (edge, v);
            }
        }
        best.0
    }

    /// Grid search for a prediction satisfying the mixability inequality for
    /// the given mixture.
    ///
    /// Candidates are `grid` evenly spaced predictions, the mixed predictions
    /// themselves and the substitution of the mix loss. For interval games
    /// the inequality is checked at `grid` evenly spaced outcomes.
    pub fn check_mixability(
        &self,
        c: f64,
        eta: f64,
        predictions: &[f64],
        weights: &[f64],
        grid: usize,
    ) -> Result<MixabilityCheck> {
        if grid < 2 {
            return Err(Error::InvalidParameter(
                "grid needs at least two points".into(),
            ));
        }
        if predictions.len() != weights.len() || predictions.is_empty() {
            return Err(Error::ExpertCountMismatch {
                expected: weights.len(),
                actual: predictions.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidPriors(format!(
                "weights must be a probability vector, sum is {total}"
            )));
        }
        if !(c >= 1.0 && eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need c >= 1, eta > 0; got {c}, {eta}"
            )));
        }
        let outcomes = match self.outcomes {
            OutcomeSet::Binary => vec![self.y_lo, self.y_hi],
            OutcomeSet::Interval => linspace(self.y_lo, self.y_hi, grid),
        };
        let log_weights: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let mix_loss: Vec<f64> = outcomes
            .iter()
            .map(|&omega| {
                let terms = log_weights
                    .iter()
                    .zip(predictions)
                    .map(|(&lw, &gamma)| lw - eta * self.loss_unchecked(gamma, omega));
                -(c / eta) * log_sum_exp_iter(terms)
            })
            .collect();
        let g = GeneralizedPrediction::new(outcomes, mix_loss)?;

        let mut candidates = linspace(self.y_lo, self.y_hi, grid);
        candidates.extend_from_slice(predictions);
        candidates.push(match self.kind {
            GameKind::Square => {
                self.square_substitution(mix_loss_at(&g, self.y_lo), mix_loss_at(&g, self.y_hi))
            }
            _ => self.argmin_substitute(&g),
        });
        let best = candidates
            .iter()
            .map(|&gamma| self.violation(gamma, &g))
            .fold(f64::INFINITY, f64::min);
        Ok(MixabilityCheck {
            holds: best <= SUBSTITUTION_TOL,
            max_violation: best,
        })
    }
}

fn mix_loss_at(g: &GeneralizedPrediction, omega: f64) -> f64 {
    g.at(omega).unwrap_or(f64::INFINITY)
}

fn excess(loss: f64, bound: f64) -> f64 {
    if bound == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        loss - bound
    }
}

/// Outcome of [`GameSpec::check_mixability`]. `max_violation` is the best
/// achievable `max_ω (λ(γ, ω) - mixloss(ω))` over the candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixabilityCheck {
    pub holds: bool,
    pub max_violation: f64,
}

/// A loss value for every outcome sample point, prior to substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPrediction {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl GeneralizedPrediction {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() || points.len() < 2 {
            return Err(Error::InvalidParameter(
                "generalized prediction needs matching points and values, at least two".into(),
            ));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "generalized prediction points must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidParameter(
                "generalized prediction values must be finite or +inf".into(),
            ));
        }
        Ok(Self { points, values })
    }

    /// Evaluates `g` at a sample point already governed by a game.
    pub fn from_fn(game: &GameSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let points = game.sample_points();
        let values = points.iter().map(|&w| f(w)).collect();
        Self::new(points, values)
    }

    pub fn at(&self, omega: f64) -> Option<f64> {
        self.points
            .iter()
            .position(|&p| (p - omega).abs() <= OUTCOME_EPS)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.values.iter().copied())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `g + shift`; substitution is invariant under such shifts.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            points: self.points.clone(),
            values: self.values.iter().map(|v| v + shift).collect(),
        }
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn loss_examples() {
        let sq = GameSpec::square(0.0, 1.0).unwrap();
        assert_eq!(sq.loss(0.5, 1.0).unwrap(), 0.25);
        let abs = GameSpec::absolute(-2.0, 2.0).unwrap();
        for x in [-2.0, -0.3, 0.0, 1.7] {
            assert_eq!(abs.loss(x, x).unwrap(), 0.0);
        }
        let log = GameSpec::log();
        assert!(close(log.loss(0.25, 1.0).unwrap(), 4f64.ln(), 1e-15));
        assert!(close(log.loss(0.25, 0.0).unwrap(), -(0.75f64).ln(), 1e-15));
    }

    #[test]
    fn log_loss_is_infinite_at_opposite_boundary() {
        let log = GameSpec::log();
        assert_eq!(log.loss(0.0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(log.loss(1.0, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(log.loss(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn loss_rejects_outcomes_outside_the_game() {
        let sq = GameSpec::square(0.0, 1.0).unwrap();
        assert!(matches!(
            sq.loss(0.5, 1.5),
            Err(Error::OutcomeOutOfDomain { .. })
        ));
        let bin = GameSpec::square(0.0, 1.0).unwrap().binary();
        assert!(matches!(
            bin.loss(0.5, 0.5),
            Err(Error::OutcomeOutOfDomain { .. })
        ));
        let log = GameSpec::log();
        assert!(matches!(
            log.loss(0.5, 0.3),
            Err(Error::OutcomeOutOfDomain { .. })
        ));
        assert!(matches!(
            log.loss(1.2, 1.0),
            Err(Error::PredictionOutOfDomain { .. })
        ));
    }

    #[test]
    fn game_validation() {
        assert!(GameSpec::square(1.0, 1.0).is_err());
        assert!(GameSpec::new(GameKind::Log, 0.0, 2.0, OutcomeSet::Binary).is_err());
        assert!(GameSpec::new(GameKind::Log, 0.0, 1.0, OutcomeSet::Interval).is_err());
        assert!(GameSpec::square(0.0, 1.0)
            .unwrap()
            .with_mixability(0.5, 1.0)
            .is_err());
    }

    #[test]
    fn mixability_constants_per_game() {
        let m = GameSpec::square(0.0, 1.0)
            .unwrap()
            .mixability_constants()
            .unwrap();
        assert_eq!((m.c, m.eta), (1.0, 2.0));
        let m = GameSpec::square(-1.0, 1.0)
            .unwrap()
            .mixability_constants()
            .unwrap();
        assert_eq!((m.c, m.eta), (1.0, 0.5));
        let m = GameSpec::log().mixability_constants().unwrap();
        assert_eq!((m.c, m.eta), (1.0, 1.0));
        assert!(GameSpec::absolute(0.0, 1.0)
            .unwrap()
            .mixability_constants()
            .is_none());
    }

    #[test]
    fn square_substitution_examples() {
        let sq = GameSpec::square(0.0, 1.0).unwrap();
        let g = GeneralizedPrediction::from_fn(&sq, |_| 0.7).unwrap();
        // Constant g = 0.7 is dominated by the midpoint, whose worst loss is 0.25.
        assert!(close(sq.substitute(&g).unwrap(), 0.5, 1e-15));

        let g = GeneralizedPrediction::from_fn(&sq, |w| (0.3 - w).powi(2)).unwrap();
        assert!(close(sq.substitute(&g).unwrap(), 0.3, 1e-15));

        let wide = GameSpec::square(-1.0, 1.0).unwrap().binary();
        assert!(close(wide.square_substitution(0.6, 0.2), 0.1, 1e-15));
        // These endpoint values are not realizable, so the verified route refuses them.
        let g = GeneralizedPrediction::new(vec![-1.0, 1.0], vec![0.6, 0.2]).unwrap();
        assert!(matches!(wide.substitute(&g), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn square_closed_form_with_feasible_endpoint_values() {
        let wide = GameSpec::square(-1.0, 1.0).unwrap().binary();
        let g = GeneralizedPrediction::new(vec![-1.0, 1.0], vec![1.4, 1.0]).unwrap();
        let gamma = wide.substitute(&g).unwrap();
        assert!(close(gamma, 0.1, 1e-15));
    }

    #[test]
    fn infeasible_g_reports_violation() {
        let sq = GameSpec::square(0.0, 1.0).unwrap();
        let g = GeneralizedPrediction::from_fn(&sq, |_| 0.1).unwrap();
        match sq.substitute(&g) {
            Err(Error::Infeasible { violation }) => assert!(close(violation, 0.15, 1e-12)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn generic_substitution_for_absolute_and_log() {
        let abs = GameSpec::absolute(0.0, 1.0).unwrap();
        let g = GeneralizedPrediction::from_fn(&abs, |w| (0.3 - w).abs()).unwrap();
        assert!(close(abs.substitute(&g).unwrap(), 0.3, 1e-9));

        let log = GameSpec::log();
        // g from a single expert predicting 0.2.
        let g = GeneralizedPrediction::new(vec![0.0, 1.0], vec![-(0.8f64).ln(), -(0.2f64).ln()])
            .unwrap();
        let gamma = log.substitute(&g).unwrap();
        assert!(close(gamma, 0.2, 1e-9));
    }

    #[test]
    fn log_substitution_handles_infinite_values() {
        let log = GameSpec::log();
        let g = GeneralizedPrediction::new(vec![0.0, 1.0], vec![f64::INFINITY, 0.0]).unwrap();
        let gamma = log.substitute(&g).unwrap();
        assert!(log.loss(gamma, 1.0).unwrap() <= SUBSTITUTION_TOL);
    }

    #[test]
    fn mixability_check_examples() {
        let sq = GameSpec::square(0.0, 1.0).unwrap();
        let res = sq
            .check_mixability(1.0, 2.0, &[0.0, 1.0], &[0.5, 0.5], 1001)
            .unwrap();
        assert!(res.holds, "{res:?}");

        let abs = GameSpec::absolute(0.0, 1.0).unwrap();
        let res = abs
            .check_mixability(1.0, 2.0, &[0.0, 1.0], &[0.5, 0.5], 1001)
            .unwrap();
        assert!(!res.holds);
        assert!(res.max_violation > 0.1);

        for game in [sq, abs, GameSpec::log()] {
            let res = game
                .check_mixability(1.0, 2.0, &[0.37], &[1.0], 11)
                .unwrap();
            assert!(res.holds, "{game:?}: {res:?}");
        }
    }

    #[test]
    fn log_game_is_mixable_with_unit_constants() {
        let log = GameSpec::log();
        let res = log
            .check_mixability(1.0, 1.0, &[0.1, 0.6, 0.95], &[0.2, 0.5, 0.3], 1001)
            .unwrap();
        assert!(res.holds, "{res:?}");
    }

    #[test]
    fn generalized_prediction_validation() {
        assert!(GeneralizedPrediction::new(vec![0.0], vec![1.0]).is_err());
        assert!(GeneralizedPrediction::new(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(GeneralizedPrediction::new(vec![0.0, 1.0], vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn linspace_hits_endpoints() {
        let xs = linspace(-1.0, 1.0, 5);
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
