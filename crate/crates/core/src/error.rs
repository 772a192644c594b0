use thiserror::Error;

/// Errors raised by the games, discounting, aggregation and regression modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("outcome {outcome} is outside the outcome set of the game")]
    OutcomeOutOfDomain { outcome: f64 },

    #[error("prediction {prediction} is outside the prediction set of the game")]
    PredictionOutOfDomain { prediction: f64 },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("generalized prediction is not realizable: max violation {violation:e}")]
    Infeasible { violation: f64 },

    #[error("discount factor {alpha} must lie in (0, 1]")]
    InvalidDiscount { alpha: f64 },

    #[error("invalid beta sequence: {0}")]
    InvalidBetaSequence(String),

    #[error("invalid prior weights: {0}")]
    InvalidPriors(String),

    #[error("{engine} does not support this game: {reason}")]
    UnsupportedGame {
        engine: &'static str,
        reason: String,
    },

    #[error("expected {expected} expert predictions, got {actual}")]
    ExpertCountMismatch { expected: usize, actual: usize },

    #[error("expected input dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("no prediction satisfies the threshold: max f - C = {excess:e}")]
    NoFeasiblePrediction { excess: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
