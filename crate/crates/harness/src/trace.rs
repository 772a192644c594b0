//! Per-step audit records.

use serde::{Deserialize, Serialize};

use crate::runner::Algorithm;

/// Names of the audited checks.
pub mod checks {
    pub const AAD_BOUND: &str = "aad-bound";
    pub const AAD_IDENTITY: &str = "aad-identity";
    pub const AAD_WEIGHTS: &str = "aad-weights";
    pub const CONVEX_BOUND: &str = "convex-bound";
    pub const CONVEX_IDENTITY: &str = "convex-identity";
    pub const CONVEX_WEIGHTS: &str = "convex-weights";
    pub const FDFD_QUANTILE: &str = "fdfd-quantile";
    pub const FDFD_THRESHOLD: &str = "fdfd-threshold";
    pub const FDFD_SUPERMARTINGALE: &str = "fdfd-supermartingale";
    pub const FDFD_MONOTONE: &str = "fdfd-monotone";
    pub const LINREG_BOUND: &str = "linreg-bound";
    pub const LINREG_NORM_DOMINANCE: &str = "linreg-norm-dominance";
    pub const KERNREG_BOUND: &str = "kernreg-bound";
    pub const KERNREG_CLOSED_FORM: &str = "kernreg-closed-form";
    pub const KERNREG_LOG_DET_CHAIN: &str = "kernreg-log-det-chain";
    pub const MIXED_BOUND: &str = "mixed-bound";
    pub const MIXED_WEIGHTS: &str = "mixed-weights";
}

/// One audited inequality `value ≤ bound`; it is violated when
/// `slack = bound - value` drops below `-tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub theorem: String,
    #[serde(with = "real")]
    pub value: f64,
    #[serde(with = "real")]
    pub bound: f64,
    #[serde(with = "real")]
    pub slack: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(theorem: &str, value: f64, bound: f64, tolerance: f64) -> Self {
        let slack = bound - value;
        // inf - inf is a vacuous check, not a violation.
        let slack = if slack.is_nan() && value == bound {
            0.0
        } else {
            slack
        };
        Self {
            theorem: theorem.to_string(),
            value,
            bound,
            slack,
            tolerance,
        }
    }

    pub fn violated(&self) -> bool {
        self.slack.is_nan() || self.slack < -self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub t: usize,
    pub alpha: f64,
    #[serde(with = "real")]
    pub beta: f64,
    #[serde(with = "real")]
    pub b_over_beta: f64,
    pub prediction: f64,
    pub outcome: f64,
    #[serde(with = "real")]
    pub learner_loss: f64,
    /// Discounted loss of every expert or comparator.
    #[serde(with = "real_vec")]
    pub comparator_losses: Vec<f64>,
    #[serde(with = "real")]
    pub best_expert_loss: f64,
    /// Bound and slack of the step's first check.
    #[serde(with = "real_opt")]
    pub bound: Option<f64>,
    #[serde(with = "real_opt")]
    pub slack: Option<f64>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub records: Vec<AuditRecord>,
}

/// JSON has no infinities; non-finite floats travel as the strings `inf`,
/// `-inf` and `nan`.
pub(crate) mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("`{other}` is not a number"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

mod real_vec {
    use super::real::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| to_repr(*x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(from_repr)
            .collect()
    }
}

mod real_opt {
    use super::real::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
    }
}
