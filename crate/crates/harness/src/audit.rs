//! Aggregates the per-step checks of a trace.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::trace::{real, Trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub theorem: String,
    /// Number of audited steps.
    pub checks: usize,
    #[serde(with = "real")]
    pub min_slack: f64,
    /// Step with the smallest slack.
    pub min_slack_step: Option<usize>,
    pub tolerance: f64,
    pub violations: usize,
    pub first_violation: Option<usize>,
}

impl TheoremSummary {
    fn new(theorem: &str) -> Self {
        Self {
            theorem: theorem.to_string(),
            checks: 0,
            min_slack: f64::INFINITY,
            min_slack_step: None,
            tolerance: 0.0,
            violations: 0,
            first_violation: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub theorems: Vec<TheoremSummary>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.theorems.iter().all(TheoremSummary::passed)
    }

    pub fn get(&self, theorem: &str) -> Option<&TheoremSummary> {
        self.theorems.iter().find(|s| s.theorem == theorem)
    }

    pub fn is_empty(&self) -> bool {
        self.theorems.is_empty()
    }
}

/// Summarizes every check present in the trace.
pub fn audit_all(trace: &Trace) -> Summary {
    summarize(trace, |_| true, &[])
}

/// Summarizes the named checks; names absent from the trace get an entry
/// with zero checks.
pub fn audit(trace: &Trace, theorems: &[&str]) -> Summary {
    summarize(trace, |name| theorems.contains(&name), theorems)
}

fn summarize(trace: &Trace, keep: impl Fn(&str) -> bool, always: &[&str]) -> Summary {
    let mut by_name: BTreeMap<String, TheoremSummary> = BTreeMap::new();
    for name in always {
        by_name.insert(name.to_string(), TheoremSummary::new(name));
    }
    for record in &trace.records {
        for check in record.checks.iter().filter(|c| keep(&c.theorem)) {
            let s = by_name
                .entry(check.theorem.clone())
                .or_insert_with(|| TheoremSummary::new(&check.theorem));
            s.checks += 1;
            s.tolerance = s.tolerance.max(check.tolerance);
            if check.slack < s.min_slack || s.min_slack_step.is_none() {
                s.min_slack = check.slack;
                s.min_slack_step = Some(record.t);
            }
            if check.violated() {
                s.violations += 1;
                s.first_violation.get_or_insert(record.t);
            }
        }
    }
    Summary {
        theorems: by_name.into_values().collect(),
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<24} {:>7} {:>14} {:>9} {:>10}  status",
            "check", "steps", "min slack", "at step", "violation"
        )?;
        for s in &self.theorems {
            let at = s.min_slack_step.map_or("-".into(), |t| t.to_string());
            let first = s.first_violation.map_or("-".into(), |t| t.to_string());
            let status = if s.passed() { "ok" } else { "VIOLATED" };
            writeln!(
                f,
                "{:<24} {:>7} {:>14.6e} {:>9} {:>10}  {status}",
                s.theorem, s.checks, s.min_slack, at, first
            )?;
        }
        Ok(())
    }
}
