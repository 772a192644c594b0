//! Online prediction with expert advice under general discounting.
//!
//! Every learner here plays the protocol in which an accountant announces a
//! discount factor `α ∈ (0,1]` before each step, experts announce
//! predictions, the learner predicts, and reality reveals the outcome. Losses
//! are accumulated as `L_t = α_{t-1} L_{t-1} + λ(γ_t, ω_t)`.
//!
//! - [`aad`]: aggregating algorithm for mixable games.
//! - [`convex`]: exponential weighting with a time-varying rate for bounded convex games.
//! - [`fdfd`]: supermartingale-threshold forecaster with quantile guarantees.
//! - [`regression`]: online linear and kernel ridge regression.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aad;
pub mod aggregator;
pub mod convex;
pub mod discounting;
pub mod error;
pub mod fdfd;
pub mod games;
pub mod numeric;
pub mod regression;

pub use aad::AadState;
pub use aggregator::Aggregator;
pub use convex::ConvexAggState;
pub use discounting::DiscountLedger;
pub use error::{Error, Result};
pub use fdfd::FdfdState;
pub use games::{GameKind, GameSpec, GeneralizedPrediction, Mixability, OutcomeSet};
