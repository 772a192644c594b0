//! The accountant, the experts and reality of a scenario.
//!
//! Every role draws from its own ChaCha stream of the scenario seed, so
//! changing one role's configuration leaves the others' draws untouched.

use std::path::Path;

use dexp_core::games::{GameKind, GameSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{DiscountSpec, ExpertSpec, RealitySpec};
use crate::error::{config, Result};

/// Log-loss experts keep this far away from 0 and 1.
pub const LOG_MARGIN: f64 = 1e-3;

const ACCOUNTANT_STREAM: u64 = 1;
const EXPERT_STREAM: u64 = 2;
const REALITY_STREAM: u64 = 3;
pub(crate) const COMPARATOR_STREAM: u64 = 4;

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn standard_normal() -> Normal<f64> {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub struct Accountant {
    spec: DiscountSpec,
    rng: ChaCha8Rng,
}

impl Accountant {
    pub fn new(spec: DiscountSpec, seed: u64) -> Self {
        Self {
            spec,
            rng: stream(seed, ACCOUNTANT_STREAM),
        }
    }

    /// Discount announced before step `t` (1-based).
    pub fn alpha(&mut self, t: usize) -> f64 {
        match &self.spec {
            DiscountSpec::Constant { alpha } => *alpha,
            DiscountSpec::List { alphas } => alphas[t - 1],
            DiscountSpec::Restart { steps, alpha } => {
                if steps.contains(&t) {
                    *alpha
                } else {
                    1.0
                }
            }
            DiscountSpec::Random { lo, hi } => self.rng.random_range(*lo..=*hi),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Expert {
    Constant(f64),
    Noisy {
        noise: f64,
    },
    Switching {
        period: usize,
        phase: usize,
        noise: f64,
    },
    Midpoint,
    Random,
}

pub struct ExpertPool {
    experts: Vec<Expert>,
    game: GameSpec,
    rng: ChaCha8Rng,
}

impl ExpertPool {
    pub fn new(specs: &[ExpertSpec], game: GameSpec, seed: u64) -> Self {
        let mut experts = Vec::new();
        for spec in specs {
            let e = match *spec {
                ExpertSpec::Constant { value } => Expert::Constant(value),
                ExpertSpec::NoisyOracle { noise, .. } => Expert::Noisy { noise },
                ExpertSpec::SwitchingOracle {
                    period,
                    phase,
                    noise,
                    ..
                } => Expert::Switching {
                    period,
                    phase,
                    noise,
                },
                ExpertSpec::AdversarialMidpoint { .. } => Expert::Midpoint,
                ExpertSpec::Random { .. } => Expert::Random,
            };
            // Replicas of a switching oracle are staggered by one period.
            for i in 0..spec.count() {
                experts.push(match e {
                    Expert::Switching {
                        period,
                        phase,
                        noise,
                    } => Expert::Switching {
                        period,
                        phase: phase + i * period,
                        noise,
                    },
                    other => other,
                });
            }
        }
        Self {
            experts,
            game,
            rng: stream(seed, EXPERT_STREAM),
        }
    }

    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }

    /// Predictions for step `t` given the latent outcome mean.
    pub fn predict(&mut self, t: usize, latent: f64) -> Vec<f64> {
        let (lo, hi) = (self.game.y_lo(), self.game.y_hi());
        let span = hi - lo;
        let normal = standard_normal();
        let mut out = Vec::with_capacity(self.experts.len());
        for e in &self.experts {
            let p = match *e {
                Expert::Constant(v) => {
                    out.push(v);
                    continue;
                }
                Expert::Noisy { noise } => latent + noise * span * normal.sample(&mut self.rng),
                Expert::Switching {
                    period,
                    phase,
                    noise,
                } => {
                    let base = if ((t - 1 + phase) / period).is_multiple_of(2) {
                        latent
                    } else {
                        lo + hi - latent
                    };
                    base + noise * span * normal.sample(&mut self.rng)
                }
                Expert::Midpoint => 0.5 * (lo + hi),
                Expert::Random => self.rng.random_range(lo..=hi),
            };
            out.push(clamp_prediction(&self.game, p));
        }
        out
    }
}

fn clamp_prediction(game: &GameSpec, p: f64) -> f64 {
    if game.kind() == GameKind::Log {
        p.clamp(LOG_MARGIN, 1.0 - LOG_MARGIN)
    } else {
        p.clamp(game.y_lo(), game.y_hi())
    }
}

/// One row of a data file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub x: Vec<f64>,
    pub y: f64,
    pub alpha: Option<f64>,
}

/// Reads a data file with header `x1,...,xn,y` and an optional `alpha`
/// column.
pub fn read_data(path: &Path) -> Result<(usize, Vec<DataRow>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut y_col = None;
    let mut alpha_col = None;
    let mut x_cols = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        match h {
            "y" => y_col = Some(i),
            "alpha" => alpha_col = Some(i),
            _ => match h.strip_prefix('x').and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if n >= 1 => x_cols.push((n, i)),
                _ => {
                    return Err(config(format!(
                        "unexpected column `{h}` in {}",
                        path.display()
                    )))
                }
            },
        }
    }
    let y_col = y_col.ok_or_else(|| config(format!("{} has no `y` column", path.display())))?;
    x_cols.sort();
    if x_cols.iter().enumerate().any(|(i, (n, _))| *n != i + 1) {
        return Err(config(format!(
            "input columns of {} must be x1..xn",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|_| {
                config(format!(
                    "row {}: `{}` is not a number",
                    line + 1,
                    &record[i]
                ))
            })
        };
        rows.push(DataRow {
            x: x_cols
                .iter()
                .map(|&(_, i)| field(i))
                .collect::<Result<_>>()?,
            y: field(y_col)?,
            alpha: alpha_col.map(field).transpose()?,
        });
    }
    Ok((x_cols.len(), rows))
}

enum Source {
    Random { drift: f64, noise: f64 },
    Adversarial { drift: f64 },
    Data(Vec<DataRow>),
}

pub struct Reality {
    source: Source,
    game: GameSpec,
    rng: ChaCha8Rng,
    latent: f64,
    truth: Vec<f64>,
}

impl Reality {
    pub fn new(spec: &RealitySpec, game: GameSpec, seed: u64) -> Result<Self> {
        let source = match spec {
            RealitySpec::Random { drift, noise } => Source::Random {
                drift: *drift,
                noise: *noise,
            },
            RealitySpec::Adversarial { drift } => Source::Adversarial { drift: *drift },
            RealitySpec::Csv { path } => Source::Data(read_data(path)?.1),
        };
        Ok(Self {
            source,
            game,
            rng: stream(seed, REALITY_STREAM),
            latent: game.midpoint(),
            truth: Vec::new(),
        })
    }

    /// Number of rows when reading from a file.
    pub fn rows(&self) -> Option<usize> {
        match &self.source {
            Source::Data(rows) => Some(rows.len()),
            _ => None,
        }
    }

    /// Input dimension of a data file.
    pub fn data_dim(&self) -> Option<usize> {
        match &self.source {
            Source::Data(rows) => rows.first().map(|r| r.x.len()),
            _ => None,
        }
    }

    /// Discount from the data file, which overrides the schedule.
    pub fn alpha(&self, t: usize) -> Option<f64> {
        match &self.source {
            Source::Data(rows) => rows[t - 1].alpha,
            _ => None,
        }
    }

    /// Advances and returns the latent outcome mean seen by oracle experts.
    pub fn latent(&mut self, t: usize) -> f64 {
        let (lo, hi) = (self.game.y_lo(), self.game.y_hi());
        match &self.source {
            Source::Random { drift, .. } | Source::Adversarial { drift } => {
                let step = drift * (hi - lo) * standard_normal().sample(&mut self.rng);
                self.latent = (self.latent + step).clamp(lo, hi);
            }
            Source::Data(rows) => self.latent = rows[t - 1].y,
        }
        self.latent
    }

    /// Input for regression step `t`.
    pub fn input(&mut self, t: usize, dim: usize, bound: f64) -> Vec<f64> {
        if let Source::Data(rows) = &self.source {
            self.latent = rows[t - 1].y;
            return rows[t - 1].x.clone();
        }
        if self.truth.len() != dim {
            let scale = 1.0 / (dim as f64).sqrt();
            self.truth = (0..dim)
                .map(|_| scale * self.rng.random_range(-1.0..=1.0))
                .collect();
        }
        let x: Vec<f64> = (0..dim)
            .map(|_| self.rng.random_range(-bound..=bound))
            .collect();
        let signal: f64 = x.iter().zip(&self.truth).map(|(a, b)| a * b).sum::<f64>()
            / bound.max(f64::MIN_POSITIVE);
        let (lo, hi) = (self.game.y_lo(), self.game.y_hi());
        self.latent = (self.game.midpoint() + 0.4 * (hi - lo) * signal).clamp(lo, hi);
        x
    }

    /// Outcome of step `t` after the learner predicted `gamma`.
    pub fn outcome(&mut self, t: usize, gamma: f64) -> Result<f64> {
        let (lo, hi) = (self.game.y_lo(), self.game.y_hi());
        let y = match &self.source {
            Source::Random { noise, .. } => {
                if self.game.is_binary() {
                    let p = (self.latent - lo) / (hi - lo);
                    if self.rng.random_bool(p.clamp(0.0, 1.0)) {
                        hi
                    } else {
                        lo
                    }
                } else {
                    let y =
                        self.latent + noise * (hi - lo) * standard_normal().sample(&mut self.rng);
                    y.clamp(lo, hi)
                }
            }
            Source::Adversarial { .. } => {
                let hurt = |y: f64| self.game.loss(gamma, y).unwrap_or(f64::INFINITY);
                if hurt(hi) >= hurt(lo) {
                    hi
                } else {
                    lo
                }
            }
            Source::Data(rows) => rows[t - 1].y,
        };
        Ok(self.game.check_outcome(y)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restart_schedule_forgets_only_at_listed_steps() {
        let mut a = Accountant::new(
            DiscountSpec::Restart {
                steps: vec![2, 4],
                alpha: 0.1,
            },
            0,
        );
        let alphas: Vec<f64> = (1..=5).map(|t| a.alpha(t)).collect();
        assert_eq!(alphas, vec![1.0, 0.1, 1.0, 0.1, 1.0]);
    }

    #[test]
    fn random_schedule_stays_in_range_and_replays() {
        let spec = DiscountSpec::Random { lo: 0.5, hi: 0.7 };
        let draw = |seed| {
            let mut a = Accountant::new(spec.clone(), seed);
            (1..=50).map(|t| a.alpha(t)).collect::<Vec<_>>()
        };
        let first = draw(3);
        assert!(first.iter().all(|a| (0.5..=0.7).contains(a)));
        assert_eq!(first, draw(3));
        assert_ne!(first, draw(4));
    }

    #[test]
    fn adversary_picks_the_far_endpoint() {
        let game = GameSpec::square(0.0, 1.0).unwrap();
        let mut r = Reality::new(&RealitySpec::Adversarial { drift: 0.1 }, game, 0).unwrap();
        assert_eq!(r.outcome(1, 0.3).unwrap(), 1.0);
        assert_eq!(r.outcome(2, 0.8).unwrap(), 0.0);
    }

    #[test]
    fn expert_predictions_are_legal() {
        let game = GameSpec::log();
        let specs = [
            ExpertSpec::Constant { value: 0.2 },
            ExpertSpec::NoisyOracle {
                noise: 5.0,
                count: 3,
            },
            ExpertSpec::SwitchingOracle {
                period: 2,
                phase: 0,
                noise: 0.0,
                count: 2,
            },
            ExpertSpec::Random { count: 2 },
        ];
        let mut pool = ExpertPool::new(&specs, game, 1);
        assert_eq!(pool.len(), 8);
        for t in 1..=20 {
            let p = pool.predict(t, 0.9);
            assert!(p
                .iter()
                .all(|v| (LOG_MARGIN..=1.0 - LOG_MARGIN).contains(v)));
            // Staggered switching replicas are mirror images of each other.
            assert!((p[4] + p[5] - 1.0).abs() < 1e-12);
        }
    }
}
