//! Runs a scenario against one learner and audits every step.
//!
//! The auditor keeps its own discounted loss book from the raw step losses,
//! so the engines' identities are checked against an independent
//! recomputation rather than against their own accumulators.

use std::fmt;

use dexp_core::aad::AadState;
use dexp_core::convex::ConvexAggState;
use dexp_core::fdfd::{epsilon_quantile_loss, quantile_bound, FdfdState};
use dexp_core::games::{GameKind, GameSpec};
use dexp_core::numeric::log_sum_exp;
use dexp_core::regression::bounds::{
    discount_weights, kernel_ridge_comparator, kernreg_bound, kernreg_closed_form_bound,
    log_det_chain,
};
use dexp_core::regression::{
    DetMode, DiscountedGram, KernRegState, LinRegState, MixedRegression, Observation,
};
use dexp_core::Aggregator;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RegressionConfig, ScenarioSpec};
use crate::error::{config, Result};
use crate::scenario::{stream, Accountant, ExpertPool, Reality, COMPARATOR_STREAM};
use crate::trace::{checks, AuditRecord, Check, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Aad,
    Convex,
    Fdfd,
    Linreg,
    Kernreg,
    MixedA,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Aad => "aad",
            Algorithm::Convex => "convex",
            Algorithm::Fdfd => "fdfd",
            Algorithm::Linreg => "linreg",
            Algorithm::Kernreg => "kernreg",
            Algorithm::MixedA => "mixed-a",
        }
    }

    pub fn is_regression(&self) -> bool {
        matches!(
            self,
            Algorithm::Linreg | Algorithm::Kernreg | Algorithm::MixedA
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Discounted losses recomputed from raw step losses.
#[derive(Debug, Clone)]
struct LossBook {
    t: usize,
    log_beta: f64,
    ratio: f64,
    learner: f64,
    experts: Vec<f64>,
}

impl LossBook {
    fn new(k: usize) -> Self {
        Self {
            t: 0,
            log_beta: 0.0,
            ratio: 0.0,
            learner: 0.0,
            experts: vec![0.0; k],
        }
    }

    fn push(&mut self, alpha: f64, learner: f64, experts: &[f64]) {
        if self.t == 0 {
            self.ratio = 1.0;
            self.learner = learner;
            self.experts.copy_from_slice(experts);
        } else {
            self.log_beta -= alpha.ln();
            self.ratio = alpha * self.ratio + 1.0;
            self.learner = alpha * self.learner + learner;
            for (l, s) in self.experts.iter_mut().zip(experts) {
                *l = alpha * *l + s;
            }
        }
        self.t += 1;
    }

    fn best(&self) -> f64 {
        self.experts.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn record(&self, alpha: f64, prediction: f64, outcome: f64, checks: Vec<Check>) -> AuditRecord {
        AuditRecord {
            t: self.t,
            alpha,
            beta: self.log_beta.exp(),
            b_over_beta: self.ratio,
            prediction,
            outcome,
            learner_loss: self.learner,
            comparator_losses: self.experts.clone(),
            best_expert_loss: self.best(),
            bound: checks.first().map(|c| c.bound),
            slack: checks.first().map(|c| c.slack),
            checks,
        }
    }
}

/// Runs `spec` with `algo` and returns the audited trace.
pub fn run(spec: &ScenarioSpec, algo: Algorithm) -> Result<Trace> {
    spec.validate()?;
    let game = spec.game.build()?;
    let mut reality = Reality::new(&spec.reality, game, spec.seed)?;
    if let Some(rows) = reality.rows() {
        if rows < spec.horizon {
            return Err(config(format!(
                "data file has {rows} rows but the horizon is {}",
                spec.horizon
            )));
        }
    }
    let records = if algo.is_regression() {
        run_regression(spec, algo, game, &mut reality)?
    } else {
        run_experts(spec, algo, game, &mut reality)?
    };
    Ok(Trace {
        algorithm: algo,
        seed: spec.seed,
        records,
    })
}

enum Engine {
    Aad(AadState),
    Convex(ConvexAggState),
    Fdfd(FdfdState),
}

impl Engine {
    fn new(algo: Algorithm, game: GameSpec, spec: &ScenarioSpec, k: usize) -> Result<Self> {
        let strict = spec.fault.is_none();
        Ok(match algo {
            Algorithm::Aad => {
                if game.mixability_constants().is_none() {
                    return Err(config("aad requires a mixable game (square or log)"));
                }
                let mut s = AadState::uniform(game, k)?;
                s.set_strict(strict);
                Engine::Aad(s)
            }
            Algorithm::Convex => {
                if game.max_loss().is_none() {
                    return Err(config(
                        "convex requires a game with bounded loss (square or absolute)",
                    ));
                }
                let mut s = ConvexAggState::new(game, k)?;
                s.set_strict(strict);
                Engine::Convex(s)
            }
            Algorithm::Fdfd => {
                if !game.is_binary() || game.max_loss().is_none() {
                    return Err(config(
                        "fdfd requires binary outcomes and bounded loss (set game.binary = true)",
                    ));
                }
                let mut s = match spec.fdfd.series_length {
                    Some(n) => FdfdState::with_series_length(game, k, n)?,
                    None => FdfdState::new(game, k)?,
                };
                s.set_strict(strict);
                Engine::Fdfd(s)
            }
            _ => unreachable!("regression algorithms run separately"),
        })
    }

    fn aggregator(&mut self) -> &mut dyn Aggregator {
        match self {
            Engine::Aad(s) => s,
            Engine::Convex(s) => s,
            Engine::Fdfd(s) => s,
        }
    }

    fn inject(&mut self, expert: usize, delta: f64) -> Result<()> {
        match self {
            Engine::Aad(s) => {
                check_expert(expert, s.num_experts())?;
                s.perturb_log_weight(expert, delta)
            }
            Engine::Convex(s) => {
                check_expert(expert, s.num_experts())?;
                s.perturb_log_weight(expert, delta)
            }
            Engine::Fdfd(s) => s.perturb_learner_loss(delta),
        }
        Ok(())
    }
}

fn check_expert(expert: usize, k: usize) -> Result<()> {
    if expert < k {
        Ok(())
    } else {
        Err(config(format!(
            "fault.expert {expert} is out of range for {k} experts"
        )))
    }
}

fn run_experts(
    spec: &ScenarioSpec,
    algo: Algorithm,
    game: GameSpec,
    reality: &mut Reality,
) -> Result<Vec<AuditRecord>> {
    let mut pool = ExpertPool::new(&spec.experts, game, spec.seed);
    if pool.is_empty() {
        return Err(config(format!("{algo} needs at least one expert")));
    }
    let k = pool.len();
    let mut engine = Engine::new(algo, game, spec, k)?;
    let mut accountant = Accountant::new(spec.discount.clone(), spec.seed);
    let mut book = LossBook::new(k);
    let tol = spec.tolerances;
    let epsilons = match &spec.fdfd.epsilons {
        Some(e) => e.clone(),
        None => vec![1.0 / k as f64, 0.1, 0.25],
    };
    // Convex-engine learning-rate accumulator `s_t`.
    let mut s_acc = 0.0;
    let mut records = Vec::with_capacity(spec.horizon);

    for t in 1..=spec.horizon {
        let alpha = reality.alpha(t).unwrap_or_else(|| accountant.alpha(t));
        let latent = reality.latent(t);
        let preds = pool.predict(t, latent);

        let mut step_checks = Vec::new();
        if let Engine::Fdfd(s) = &engine {
            if let Some(gap) = s.monotonicity_gap(alpha)? {
                step_checks.push(Check::new(
                    checks::FDFD_MONOTONE,
                    -gap,
                    0.0,
                    tol.fdfd_threshold,
                ));
            }
        }

        let gamma = engine.aggregator().predict(alpha, &preds)?;
        let y = reality.outcome(t, gamma)?;
        let fdfd_f = match &engine {
            Engine::Fdfd(s) => Some(s.f_value(alpha, &preds, gamma, y)?),
            _ => None,
        };
        engine.aggregator().update(alpha, &preds, gamma, y)?;
        if let Some(f) = spec.fault.filter(|f| f.step == t) {
            engine.inject(f.expert, f.delta)?;
        }

        let learner_step = game.loss(gamma, y)?;
        let expert_steps = preds
            .iter()
            .map(|&p| game.loss(p, y))
            .collect::<dexp_core::Result<Vec<_>>>()?;
        book.push(alpha, learner_step, &expert_steps);

        let mut audit = match &engine {
            Engine::Aad(s) => audit_aad(s, &book, &tol),
            Engine::Convex(s) => {
                let eta = s.rate_scale() / book.ratio.sqrt();
                s_acc = if t == 1 { eta } else { alpha * s_acc + eta };
                audit_convex(s, &book, eta, s_acc, &tol)
            }
            Engine::Fdfd(s) => audit_fdfd(s, &book, &epsilons, fdfd_f, &tol)?,
        };
        audit.append(&mut step_checks);
        records.push(book.record(alpha, gamma, y, audit));
    }
    Ok(records)
}

fn audit_aad(s: &AadState, book: &LossBook, tol: &crate::config::Tolerances) -> Vec<Check> {
    let mix = s.mixability();
    let bound = book
        .experts
        .iter()
        .zip(s.log_priors())
        .map(|(l, lp)| mix.c * l - (mix.c / mix.eta) * lp)
        .fold(f64::INFINITY, f64::min);
    let gap = s
        .log_weights()
        .iter()
        .zip(&book.experts)
        .filter(|(_, l)| l.is_finite())
        .map(|(lw, l)| (lw - mix.eta * (book.learner / mix.c - l)).abs())
        .fold(0.0, f64::max);
    let terms: Vec<f64> = s
        .log_priors()
        .iter()
        .zip(s.log_weights())
        .map(|(p, w)| p + w)
        .collect();
    vec![
        Check::new(checks::AAD_BOUND, book.learner, bound, tol.aad),
        Check::new(checks::AAD_IDENTITY, gap, 0.0, tol.identity),
        Check::new(
            checks::AAD_WEIGHTS,
            log_sum_exp(&terms).exp(),
            1.0,
            tol.weights,
        ),
    ]
}

fn audit_convex(
    s: &ConvexAggState,
    book: &LossBook,
    eta: f64,
    s_acc: f64,
    tol: &crate::config::Tolerances,
) -> Vec<Check> {
    let k = book.experts.len();
    let scale = s.scale();
    let a = s.rate_scale();
    let regret = if k == 1 {
        0.0
    } else {
        ((k as f64).ln() / a + a / 4.0) * book.ratio.sqrt()
    };
    let learner = book.learner / scale;
    let gap = s
        .log_weights()
        .iter()
        .zip(&book.experts)
        .map(|(lw, l)| (lw - (eta * (learner - l / scale) - eta * s_acc / 8.0)).abs())
        .fold(0.0, f64::max);
    let mean_log = log_sum_exp(s.log_weights()) - (k as f64).ln();
    vec![
        Check::new(
            checks::CONVEX_BOUND,
            book.learner,
            book.best() + scale * regret,
            tol.convex,
        ),
        Check::new(checks::CONVEX_IDENTITY, gap, 0.0, tol.identity),
        Check::new(checks::CONVEX_WEIGHTS, mean_log.exp(), 1.0, tol.weights),
    ]
}

fn audit_fdfd(
    s: &FdfdState,
    book: &LossBook,
    epsilons: &[f64],
    f: Option<f64>,
    tol: &crate::config::Tolerances,
) -> Result<Vec<Check>> {
    let scale = s.scale();
    let mut quantile: Option<Check> = None;
    for &eps in epsilons {
        let q = epsilon_quantile_loss(&book.experts, eps)?;
        let bound = q + scale * quantile_bound(book.ratio, eps)?;
        let c = Check::new(checks::FDFD_QUANTILE, book.learner, bound, tol.fdfd);
        if quantile.as_ref().is_none_or(|best| c.slack < best.slack) {
            quantile = Some(c);
        }
    }
    let mut out: Vec<Check> = quantile.into_iter().collect();
    if let (Some(f), Some(c)) = (f, s.last_threshold()) {
        out.push(Check::new(
            checks::FDFD_THRESHOLD,
            c,
            1.0,
            tol.fdfd_threshold,
        ));
        out.push(Check::new(
            checks::FDFD_SUPERMARTINGALE,
            f,
            c,
            tol.fdfd_threshold,
        ));
    }
    Ok(out)
}

enum RegEngine {
    Linear(LinRegState),
    Kernel(KernRegState),
    Mixed(MixedRegression),
}

fn regression_dim(cfg: &RegressionConfig, reality: &Reality) -> Result<usize> {
    match (cfg.dim, reality.data_dim()) {
        (Some(d), Some(f)) if d != f => Err(config(format!(
            "regression.dim is {d} but the data file has {f} inputs"
        ))),
        (_, Some(f)) => Ok(f),
        (Some(d), None) if d > 0 => Ok(d),
        _ => Err(config("regression.dim must be a positive integer")),
    }
}

fn run_regression(
    spec: &ScenarioSpec,
    algo: Algorithm,
    game: GameSpec,
    reality: &mut Reality,
) -> Result<Vec<AuditRecord>> {
    let cfg = spec
        .regression
        .as_ref()
        .ok_or_else(|| config(format!("{algo} needs a [regression] section")))?;
    if game.kind() != GameKind::Square || game.is_binary() {
        return Err(config(format!(
            "{algo} requires the square game on an outcome interval"
        )));
    }
    let (lo, hi) = (game.y_lo(), game.y_hi());
    let dim = regression_dim(cfg, reality)?;
    let mut engine = match algo {
        Algorithm::Linreg => {
            RegEngine::Linear(LinRegState::new(dim, cfg.ridge_parameter()?, lo, hi)?)
        }
        Algorithm::Kernreg => {
            let kernel = cfg
                .kernel
                .ok_or_else(|| config("kernreg needs regression.kernel"))?;
            let mut s = KernRegState::new(kernel, dim, cfg.ridge_parameter()?, lo, hi)?;
            if let Some(th) = cfg.truncation {
                s = s.with_truncation(th)?;
            }
            RegEngine::Kernel(s)
        }
        Algorithm::MixedA => RegEngine::Mixed(match cfg.kernel {
            Some(kernel) => MixedRegression::kernel(kernel, dim, &cfg.grid, lo, hi)?,
            None => MixedRegression::linear(dim, &cfg.grid, lo, hi)?,
        }),
        _ => unreachable!("expert algorithms run separately"),
    };

    let mut rng = stream(spec.seed, COMPARATOR_STREAM);
    let thetas: Vec<Vec<f64>> = (0..cfg.comparators)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let priors: Vec<f64> = {
        let inv: Vec<f64> = cfg.grid.iter().map(|a| 1.0 / (a * a)).collect();
        let total: f64 = inv.iter().sum();
        inv.iter().map(|v| v / total).collect()
    };
    let members = match &engine {
        RegEngine::Mixed(m) => m.members().len(),
        _ => 0,
    };

    let mut accountant = Accountant::new(spec.discount.clone(), spec.seed);
    let mut gram = DiscountedGram::new(dim);
    let mut data: Vec<Observation> = Vec::new();
    let mut book = LossBook::new(members);
    let tol = spec.tolerances;
    let mut records = Vec::with_capacity(spec.horizon);

    for t in 1..=spec.horizon {
        let alpha = reality.alpha(t).unwrap_or_else(|| accountant.alpha(t));
        let x = reality.input(t, dim, cfg.input_bound);
        let (gamma, member_preds) = match &engine {
            RegEngine::Linear(s) => (s.predict(alpha, &x)?, Vec::new()),
            RegEngine::Kernel(s) => (s.predict(alpha, &x)?, Vec::new()),
            RegEngine::Mixed(m) => {
                let p = m.predict(alpha, &x)?;
                (p.prediction, p.members)
            }
        };
        let y = reality.outcome(t, gamma)?;
        match &mut engine {
            RegEngine::Linear(s) => s.update(alpha, &x, y, gamma)?,
            RegEngine::Kernel(s) => s.update(alpha, &x, y, gamma)?,
            RegEngine::Mixed(m) => {
                let step = dexp_core::regression::MixedPrediction {
                    prediction: gamma,
                    members: member_preds.clone(),
                };
                m.update(alpha, &x, y, &step)?;
            }
        }
        let member_steps: Vec<f64> = member_preds.iter().map(|p| (p - y).powi(2)).collect();
        book.push(alpha, (gamma - y).powi(2), &member_steps);
        gram.push(alpha, &x, y)?;
        data.push(Observation { x, y, alpha });

        let audited = t % cfg.audit_every == 0 || t == spec.horizon;
        let mut record = book.record(alpha, gamma, y, Vec::new());
        if audited {
            let (losses, step_checks) = match &engine {
                RegEngine::Linear(s) => audit_linear(
                    &gram,
                    &thetas,
                    s.ridge(),
                    cfg.mode,
                    lo,
                    hi,
                    book.learner,
                    &tol,
                )?,
                RegEngine::Kernel(s) => audit_kernel(&data, s, cfg, lo, hi, book.learner, &tol)?,
                RegEngine::Mixed(m) => {
                    let bound = book
                        .experts
                        .iter()
                        .zip(&priors)
                        .map(|(l, p)| l + 0.5 * (hi - lo).powi(2) * (1.0 / p).ln())
                        .fold(f64::INFINITY, f64::min);
                    let weights = m.aggregator().weight_sum();
                    (
                        book.experts.clone(),
                        vec![
                            Check::new(checks::MIXED_BOUND, book.learner, bound, tol.mixed),
                            Check::new(checks::MIXED_WEIGHTS, weights, 1.0, tol.weights),
                        ],
                    )
                }
            };
            record.best_expert_loss = losses.iter().copied().fold(f64::INFINITY, f64::min);
            record.comparator_losses = losses;
            record.bound = step_checks.first().map(|c| c.bound);
            record.slack = step_checks.first().map(|c| c.slack);
            record.checks = step_checks;
        } else {
            record.comparator_losses.clear();
            record.best_expert_loss = f64::NAN;
        }
        records.push(record);
    }
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn audit_linear(
    gram: &DiscountedGram,
    thetas: &[Vec<f64>],
    a: f64,
    mode: DetMode,
    lo: f64,
    hi: f64,
    learner: f64,
    tol: &crate::config::Tolerances,
) -> Result<(Vec<f64>, Vec<Check>)> {
    let ridge = gram.ridge(a)?;
    let mut losses = Vec::with_capacity(thetas.len() + 1);
    let mut bound = f64::INFINITY;
    for theta in std::iter::once(&ridge).chain(thetas) {
        losses.push(gram.comparator_loss(theta)?);
        bound = bound.min(gram.linreg_bound(theta, a, lo, hi, mode)?);
    }
    let det = gram.complexity(a, lo, hi, DetMode::Determinant)?;
    let inf = gram.complexity(a, lo, hi, DetMode::InfinityNorm)?;
    Ok((
        losses,
        vec![
            Check::new(checks::LINREG_BOUND, learner, bound, tol.linreg),
            Check::new(checks::LINREG_NORM_DOMINANCE, det, inf, tol.linreg),
        ],
    ))
}

fn audit_kernel(
    data: &[Observation],
    s: &KernRegState,
    cfg: &RegressionConfig,
    lo: f64,
    hi: f64,
    learner: f64,
    tol: &crate::config::Tolerances,
) -> Result<(Vec<f64>, Vec<Check>)> {
    let kernel = s.kernel();
    let a = s.ridge();
    let coeffs = kernel_ridge_comparator(data, kernel, a)?;
    let bound = kernreg_bound(data, &coeffs, kernel, a, lo, hi)?;
    let fit = fit_loss(data, &coeffs, kernel)?;
    let mut out = vec![Check::new(
        checks::KERNREG_BOUND,
        learner,
        bound,
        tol.kernreg,
    )];
    if let (None, Some(c_f), Some(horizon)) = (cfg.ridge, cfg.c_f, cfg.horizon_bound) {
        let closed = kernreg_closed_form_bound(data, &coeffs, kernel, c_f, horizon, lo, hi)?;
        out.push(Check::new(
            checks::KERNREG_CLOSED_FORM,
            learner,
            closed,
            tol.kernreg,
        ));
        let chain = log_det_chain(data, kernel, c_f, a, horizon)?;
        out.push(Check::new(
            checks::KERNREG_LOG_DET_CHAIN,
            chain.max_violation(),
            0.0,
            tol.chain,
        ));
    }
    Ok((vec![fit], out))
}

/// `Σ w_t (f(x_t) - y_t)²` of the representer expansion over the stream.
fn fit_loss(
    data: &[Observation],
    coeffs: &[f64],
    kernel: &dexp_core::regression::Kernel,
) -> Result<f64> {
    let w = discount_weights(data)?;
    Ok(data
        .iter()
        .zip(&w)
        .map(|(o, w)| {
            let f: f64 = data
                .iter()
                .zip(coeffs)
                .map(|(oi, c)| c * kernel.eval(&oi.x, &o.x))
                .sum();
            w * (f - o.y).powi(2)
        })
        .sum())
}
