//! Scenario files.
//!
//! A scenario is a TOML document; unknown keys are rejected.
//!
//! ```toml
//! horizon = 1000
//! seed = 42
//! algo = "aad"
//!
//! [game]
//! kind = "square"
//! y_lo = 0.0
//! y_hi = 1.0
//!
//! [discount]
//! type = "random"
//! lo = 0.5
//! hi = 1.0
//!
//! [[experts]]
//! type = "noisy-oracle"
//! noise = 0.1
//! count = 4
//!
//! [reality]
//! type = "adversarial"
//! ```

use std::path::{Path, PathBuf};

use dexp_core::games::{GameKind, GameSpec, OutcomeSet};
use dexp_core::regression::{DetMode, Kernel};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::runner::Algorithm;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    /// Default algorithm when the command line does not name one.
    #[serde(default)]
    pub algo: Option<Algorithm>,
    pub game: GameConfig,
    #[serde(default)]
    pub discount: DiscountSpec,
    #[serde(default)]
    pub experts: Vec<ExpertSpec>,
    #[serde(default)]
    pub reality: RealitySpec,
    #[serde(default)]
    pub regression: Option<RegressionConfig>,
    #[serde(default)]
    pub fdfd: FdfdConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fault: Option<FaultSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub kind: GameKind,
    #[serde(default)]
    pub y_lo: f64,
    #[serde(default = "one")]
    pub y_hi: f64,
    /// Restrict outcomes to the two endpoints.
    #[serde(default)]
    pub binary: bool,
}

impl GameConfig {
    pub fn build(&self) -> Result<GameSpec> {
        let outcomes = if self.binary || self.kind == GameKind::Log {
            OutcomeSet::Binary
        } else {
            OutcomeSet::Interval
        };
        Ok(GameSpec::new(self.kind, self.y_lo, self.y_hi, outcomes)?)
    }
}

/// How the accountant picks `α_t`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiscountSpec {
    Constant {
        alpha: f64,
    },
    /// One factor per step; must cover the horizon.
    List {
        alphas: Vec<f64>,
    },
    /// `α = 1` except at the listed steps, where `α = alpha`.
    Restart {
        steps: Vec<usize>,
        #[serde(default = "restart_alpha")]
        alpha: f64,
    },
    /// Uniform on `[lo, hi]`.
    Random {
        lo: f64,
        hi: f64,
    },
}

impl Default for DiscountSpec {
    fn default() -> Self {
        DiscountSpec::Constant { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExpertSpec {
    Constant {
        value: f64,
    },
    /// The latent outcome mean plus Gaussian noise of `noise · span`.
    NoisyOracle {
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default = "one_usize")]
        count: usize,
    },
    /// Alternates between the noisy oracle and its mirror image every
    /// `period` steps; `phase` shifts the schedule.
    SwitchingOracle {
        period: usize,
        #[serde(default)]
        phase: usize,
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default = "one_usize")]
        count: usize,
    },
    /// Always the midpoint of the outcome interval.
    AdversarialMidpoint {
        #[serde(default = "one_usize")]
        count: usize,
    },
    /// Uniform on the outcome interval.
    Random {
        #[serde(default = "one_usize")]
        count: usize,
    },
}

impl ExpertSpec {
    pub fn count(&self) -> usize {
        match *self {
            ExpertSpec::Constant { .. } => 1,
            ExpertSpec::NoisyOracle { count, .. }
            | ExpertSpec::SwitchingOracle { count, .. }
            | ExpertSpec::AdversarialMidpoint { count }
            | ExpertSpec::Random { count } => count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RealitySpec {
    /// Outcomes scattered around a drifting latent mean.
    Random {
        #[serde(default = "default_noise")]
        drift: f64,
        #[serde(default = "default_noise")]
        noise: f64,
    },
    /// Outcomes (and optionally inputs and discounts) read from a file.
    /// Relative paths resolve against the scenario file's directory.
    Csv { path: PathBuf },
    /// The endpoint outcome that maximizes the learner's loss.
    Adversarial {
        #[serde(default = "default_noise")]
        drift: f64,
    },
}

impl Default for RealitySpec {
    fn default() -> Self {
        RealitySpec::Random {
            drift: default_noise(),
            noise: default_noise(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionConfig {
    /// Input dimension; inferred from the header for csv input.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Ridge parameter; when absent and both `c_f` and `horizon_bound` are
    /// given, `c_f √horizon_bound` is used.
    #[serde(default)]
    pub ridge: Option<f64>,
    #[serde(default)]
    pub kernel: Option<Kernel>,
    /// Ridge grid merged by the mixed learner.
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    /// Random comparators audited besides the ridge optimum.
    #[serde(default = "default_comparators")]
    pub comparators: usize,
    #[serde(default = "default_mode")]
    pub mode: DetMode,
    /// Bound on `√k(x,x)`.
    #[serde(default)]
    pub c_f: Option<f64>,
    /// Known bound on `B_T/β_T`.
    #[serde(default)]
    pub horizon_bound: Option<f64>,
    #[serde(default)]
    pub truncation: Option<f64>,
    /// Inputs are drawn uniformly from `[-input_bound, input_bound]^dim`.
    #[serde(default = "one")]
    pub input_bound: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Audit every this many steps (and always the last one).
    #[serde(default = "one_usize")]
    pub audit_every: usize,
}

impl RegressionConfig {
    pub fn ridge_parameter(&self) -> Result<f64> {
        match (self.ridge, self.c_f, self.horizon_bound) {
            (Some(a), _, _) => Ok(a),
            (None, Some(c), Some(h)) => Ok(dexp_core::regression::bounds::closed_form_ridge(c, h)),
            _ => Err(config(
                "regression.ridge is required unless c_f and horizon_bound are set",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdfdConfig {
    /// Quantile levels audited; defaults to `1/K`, 0.1 and 0.25.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub series_length: Option<usize>,
}

/// Slack tolerances of the audited checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub aad: f64,
    pub convex: f64,
    pub fdfd: f64,
    pub fdfd_threshold: f64,
    pub linreg: f64,
    pub kernreg: f64,
    pub mixed: f64,
    pub identity: f64,
    pub weights: f64,
    pub chain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            aad: 1e-9,
            convex: 1e-9,
            fdfd: 1e-6,
            fdfd_threshold: 1e-9,
            linreg: 1e-7,
            kernreg: 1e-6,
            mixed: 1e-7,
            identity: 1e-9,
            weights: 1e-12,
            chain: 1e-9,
        }
    }
}

/// Deliberate state corruption after step `step`, for exercising the audit.
/// Adds `delta` to expert `expert`'s log-weight (the learner's loss for
/// FDFD).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub step: usize,
    #[serde(default)]
    pub expert: usize,
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn restart_alpha() -> f64 {
    0.5
}

fn default_noise() -> f64 {
    0.1
}

fn default_grid() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0]
}

fn default_comparators() -> usize {
    100
}

fn default_mode() -> DetMode {
    DetMode::Determinant
}

impl ScenarioSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_value(toml::from_str(text)?, None)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_value(load_table(path)?, path.parent())
    }

    /// Parses an already loaded document; relative csv paths are resolved
    /// against `base_dir`.
    pub fn from_value(value: toml::Table, base_dir: Option<&Path>) -> Result<Self> {
        let mut spec: ScenarioSpec = toml::Value::Table(value).try_into()?;
        if let (RealitySpec::Csv { path }, Some(dir)) = (&mut spec.reality, base_dir) {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(config("horizon must be at least 1"));
        }
        self.game.build()?;
        match &self.discount {
            DiscountSpec::Constant { alpha } | DiscountSpec::Restart { alpha, .. } => {
                check_alpha(*alpha)?
            }
            DiscountSpec::List { alphas } => {
                if alphas.len() < self.horizon {
                    return Err(config(format!(
                        "discount list has {} entries but the horizon is {}",
                        alphas.len(),
                        self.horizon
                    )));
                }
                alphas.iter().try_for_each(|a| check_alpha(*a))?;
            }
            DiscountSpec::Random { lo, hi } => {
                check_alpha(*lo)?;
                check_alpha(*hi)?;
                if lo > hi {
                    return Err(config(format!("discount range [{lo}, {hi}] is empty")));
                }
            }
        }
        for e in &self.experts {
            match *e {
                ExpertSpec::SwitchingOracle { period: 0, .. } => {
                    return Err(config("switching-oracle period must be positive"))
                }
                ExpertSpec::NoisyOracle { noise, .. }
                | ExpertSpec::SwitchingOracle { noise, .. }
                    if !(noise >= 0.0 && noise.is_finite()) =>
                {
                    return Err(config(format!(
                        "expert noise must be non-negative, got {noise}"
                    )))
                }
                _ => {}
            }
            if e.count() == 0 {
                return Err(config("expert count must be positive"));
            }
        }
        if let Some(r) = &self.regression {
            if r.audit_every == 0 {
                return Err(config("regression.audit_every must be positive"));
            }
            if let Some(k) = &r.kernel {
                k.validate()?;
            }
        }
        Ok(())
    }

    /// Total number of experts.
    pub fn num_experts(&self) -> usize {
        self.experts.iter().map(ExpertSpec::count).sum()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(config(format!(
            "discount factor {alpha} must lie in (0, 1]"
        )))
    }
}

pub fn load_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path)?;
    Ok(toml::from_str(&text)?)
}

/// Sets a dotted key such as `discount.alpha` to a TOML literal; values that
/// do not parse as TOML are taken as strings.
pub fn set_key(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| config(format!("empty key `{key}`")))?;
    let mut node = table;
    for part in parts {
        node = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| config(format!("`{part}` in `{key}` is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}
