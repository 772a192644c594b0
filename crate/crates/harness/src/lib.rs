//! Scenario runner and bound auditor for the discounted expert-advice and
//! regression learners of `dexp-core`.
//!
//! A scenario file fixes the game, the accountant's discount schedule, the
//! experts and reality. [`run`] plays it against one learner and records,
//! at every step, each loss bound and invariant the learner guarantees;
//! [`audit_all`] condenses a trace into per-check minimum slacks.

pub mod audit;
pub mod config;
pub mod emit;
pub mod error;
pub mod runner;
pub mod scenario;
pub mod sweep;
pub mod trace;

pub use audit::{audit, audit_all, Summary, TheoremSummary};
pub use config::{ScenarioSpec, Tolerances};
pub use emit::{emit, Format};
pub use error::{Error, Result};
pub use runner::{run, Algorithm};
pub use trace::{checks, AuditRecord, Check, Trace};
