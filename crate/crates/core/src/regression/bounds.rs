//! Loss bounds for the regression learners and the comparators used to
//! audit them.
//!
//! Comparator losses use the weights `w_t = β_t/β_T` of the horizon `T`, so
//! every quantity here is the discounted loss `Σ_t w_t (·)²` after the last
//! observation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::linalg::{spd_log_det, spd_solve};
use super::{check_interval, check_ridge};
use crate::discounting::DiscountLedger;
use crate::error::{Error, Result};

/// One step of a regression stream; `alpha` is the discount announced before
/// the step (ignored for the first step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: f64,
    pub alpha: f64,
}

/// How the complexity term of the linear bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetMode {
    /// `(Δ²/4) ln det(X'WX/a + I)`.
    Determinant,
    /// `n (Δ²/4) ln(Z² (B/β)/a + 1)` with `Z = max ‖x_t‖∞`.
    InfinityNorm,
}

/// Discounted sufficient statistics `G = X'WX`, `h = X'Wy`, `q = Σ w y²` of
/// a stream, updated in place as observations arrive.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedGram {
    g: DMatrix<f64>,
    h: DVector<f64>,
    q: f64,
    ledger: DiscountLedger,
    z_inf: f64,
}

impl DiscountedGram {
    pub fn new(dim: usize) -> Self {
        Self {
            g: DMatrix::zeros(dim, dim),
            h: DVector::zeros(dim),
            q: 0.0,
            ledger: DiscountLedger::new(),
            z_inf: 0.0,
        }
    }

    pub fn from_observations(dim: usize, data: &[Observation]) -> Result<Self> {
        let mut gram = Self::new(dim);
        for obs in data {
            gram.push(obs.alpha, &obs.x, obs.y)?;
        }
        Ok(gram)
    }

    pub fn push(&mut self, alpha: f64, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.h.len() {
            return Err(Error::DimensionMismatch {
                expected: self.h.len(),
                actual: x.len(),
            });
        }
        self.ledger = self.ledger.advance(alpha)?;
        let x = DVector::from_column_slice(x);
        self.g *= alpha;
        self.g.ger(1.0, &x, &x, 1.0);
        self.h = &self.h * alpha + &x * y;
        self.q = alpha * self.q + y * y;
        self.z_inf = self.z_inf.max(x.amax());
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn moment(&self) -> &DVector<f64> {
        &self.h
    }

    pub fn ledger(&self) -> &DiscountLedger {
        &self.ledger
    }

    /// Largest `‖x_t‖∞` seen so far.
    pub fn z_inf(&self) -> f64 {
        self.z_inf
    }

    /// `Σ w_t (θ'x_t - y_t)²` through the expansion `θ'Gθ - 2θ'h + q`.
    pub fn comparator_loss(&self, theta: &[f64]) -> Result<f64> {
        let theta = self.check_theta(theta)?;
        Ok((theta.transpose() * &self.g * &theta)[(0, 0)] - 2.0 * theta.dot(&self.h) + self.q)
    }

    /// `ln det(G/a + I)`.
    pub fn log_det(&self, a: f64) -> Result<f64> {
        check_ridge(a)?;
        let n = self.dim();
        spd_log_det(&(&self.g / a + DMatrix::identity(n, n)))
    }

    /// Complexity term of the bound in the given mode.
    pub fn complexity(&self, a: f64, y_lo: f64, y_hi: f64, mode: DetMode) -> Result<f64> {
        check_interval(y_lo, y_hi)?;
        let quarter = (y_hi - y_lo).powi(2) / 4.0;
        Ok(match mode {
            DetMode::Determinant => quarter * self.log_det(a)?,
            DetMode::InfinityNorm => {
                check_ridge(a)?;
                let ratio = self.ledger.b_over_beta();
                self.dim() as f64 * quarter * (self.z_inf.powi(2) * ratio / a).ln_1p()
            }
        })
    }

    /// Right-hand side of the linear regression bound for comparator `θ`.
    pub fn linreg_bound(
        &self,
        theta: &[f64],
        a: f64,
        y_lo: f64,
        y_hi: f64,
        mode: DetMode,
    ) -> Result<f64> {
        let norm2: f64 = theta.iter().map(|v| v * v).sum();
        Ok(self.comparator_loss(theta)? + a * norm2 + self.complexity(a, y_lo, y_hi, mode)?)
    }

    /// `θ* = (aI + G)⁻¹ h`, the minimizer of `Σ w (θ'x - y)² + a‖θ‖²`.
    pub fn ridge(&self, a: f64) -> Result<Vec<f64>> {
        check_ridge(a)?;
        let n = self.dim();
        Ok(
            spd_solve(&(&self.g + DMatrix::identity(n, n) * a), &self.h)?
                .iter()
                .copied()
                .collect(),
        )
    }

    fn check_theta(&self, theta: &[f64]) -> Result<DVector<f64>> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: theta.len(),
            });
        }
        Ok(DVector::from_column_slice(theta))
    }
}

fn data_dim(data: &[Observation]) -> usize {
    data.first().map_or(0, |o| o.x.len())
}

/// Linear regression bound for comparator `θ` after the whole stream.
pub fn linreg_bound(
    data: &[Observation],
    theta: &[f64],
    a: f64,
    y_lo: f64,
    y_hi: f64,
    mode: DetMode,
) -> Result<f64> {
    let dim = if data.is_empty() {
        theta.len()
    } else {
        data_dim(data)
    };
    DiscountedGram::from_observations(dim, data)?.linreg_bound(theta, a, y_lo, y_hi, mode)
}

/// Discounted ridge regression optimum over the whole stream.
pub fn ridge_comparator(data: &[Observation], dim: usize, a: f64) -> Result<Vec<f64>> {
    DiscountedGram::from_observations(dim, data)?.ridge(a)
}

/// `β_t/β_T` for every step of the stream, computed from log-betas.
pub fn discount_weights(data: &[Observation]) -> Result<Vec<f64>> {
    let mut ledger = DiscountLedger::new();
    let mut logs = Vec::with_capacity(data.len());
    for obs in data {
        ledger = ledger.advance(obs.alpha)?;
        logs.push(ledger.log_beta());
    }
    let last = ledger.log_beta();
    Ok(logs.into_iter().map(|l| (l - last).exp()).collect())
}

/// Kernel matrix `K_ij = k(x_i, x_j)`.
pub fn kernel_matrix(kernel: &Kernel, xs: &[&[f64]]) -> DMatrix<f64> {
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(xs[i], xs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Stream pieces shared by the kernel bounds.
struct KernelData {
    k: DMatrix<f64>,
    sqrt_w: DVector<f64>,
    w: Vec<f64>,
    y: DVector<f64>,
}

impl KernelData {
    fn new(data: &[Observation], kernel: &Kernel) -> Result<Self> {
        let xs: Vec<&[f64]> = data.iter().map(|o| o.x.as_slice()).collect();
        let w = discount_weights(data)?;
        Ok(Self {
            k: kernel_matrix(kernel, &xs),
            sqrt_w: DVector::from_iterator(w.len(), w.iter().map(|v| v.sqrt())),
            y: DVector::from_iterator(data.len(), data.iter().map(|o| o.y)),
            w,
        })
    }

    /// `√W K √W`.
    fn weighted_kernel(&self) -> DMatrix<f64> {
        let mut m = self.k.clone();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                m[(i, j)] *= self.sqrt_w[i] * self.sqrt_w[j];
            }
        }
        m
    }

    fn log_det(&self, a: f64) -> Result<f64> {
        let n = self.k.nrows();
        spd_log_det(&(self.weighted_kernel() / a + DMatrix::identity(n, n)))
    }

    /// `(Σ w ((Kc)_t - y_t)², ‖f‖² = c'Kc)`.
    fn fit(&self, coeffs: &[f64]) -> Result<(f64, f64)> {
        if coeffs.len() != self.y.len() {
            return Err(Error::DimensionMismatch {
                expected: self.y.len(),
                actual: coeffs.len(),
            });
        }
        let c = DVector::from_column_slice(coeffs);
        let fitted = &self.k * &c;
        let loss = self
            .w
            .iter()
            .zip(fitted.iter().zip(self.y.iter()))
            .map(|(w, (f, y))| w * (f - y).powi(2))
            .sum();
        Ok((loss, c.dot(&fitted)))
    }
}

/// `ln det(√W K √W/a + I)` for the inputs of the stream.
pub fn kernel_log_det(data: &[Observation], kernel: &Kernel, a: f64) -> Result<f64> {
    check_ridge(a)?;
    if data.is_empty() {
        return Ok(0.0);
    }
    KernelData::new(data, kernel)?.log_det(a)
}

/// Kernel regression bound for `f = Σ c_i k(·, x_i)` over the points of the
/// stream.
pub fn kernreg_bound(
    data: &[Observation],
    coeffs: &[f64],
    kernel: &Kernel,
    a: f64,
    y_lo: f64,
    y_hi: f64,
) -> Result<f64> {
    check_interval(y_lo, y_hi)?;
    check_ridge(a)?;
    if data.is_empty() {
        return Ok(0.0);
    }
    let kd = KernelData::new(data, kernel)?;
    let (loss, norm2) = kd.fit(coeffs)?;
    Ok(loss + a * norm2 + (y_hi - y_lo).powi(2) / 4.0 * kd.log_det(a)?)
}

/// The ridge parameter `c_F √𝒯` that turns the kernel bound into its
/// closed form.
pub fn closed_form_ridge(c_f: f64, horizon_bound: f64) -> f64 {
    c_f * horizon_bound.sqrt()
}

/// `Σ w (f(x_t) - y_t)² + (Δ²/4 + ‖f‖²) c_F √𝒯`, valid for the learner run
/// with ridge parameter [`closed_form_ridge`] whenever `B_T/β_T ≤ 𝒯` and
/// `k(x,x) ≤ c_F²`.
pub fn kernreg_closed_form_bound(
    data: &[Observation],
    coeffs: &[f64],
    kernel: &Kernel,
    c_f: f64,
    horizon_bound: f64,
    y_lo: f64,
    y_hi: f64,
) -> Result<f64> {
    check_interval(y_lo, y_hi)?;
    if data.is_empty() {
        return Ok(0.0);
    }
    let (loss, norm2) = KernelData::new(data, kernel)?.fit(coeffs)?;
    Ok(loss + ((y_hi - y_lo).powi(2) / 4.0 + norm2) * c_f * horizon_bound.sqrt())
}

/// Successive upper estimates of `ln det(√W K √W/a + I)`:
/// the value itself, the Hadamard product of the diagonal,
/// `T ln(1 + c_F² mean(w)/a)`, `c_F² (B/β)/a` and `c_F² 𝒯/a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDetChain {
    pub log_det: f64,
    pub diagonal: f64,
    pub mean_weight: f64,
    pub linearized: f64,
    pub horizon: f64,
}

impl LogDetChain {
    pub fn values(&self) -> [f64; 5] {
        [
            self.log_det,
            self.diagonal,
            self.mean_weight,
            self.linearized,
            self.horizon,
        ]
    }

    /// Largest violation of the chain's ordering (non-positive when it holds).
    pub fn max_violation(&self) -> f64 {
        self.values()
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn log_det_chain(
    data: &[Observation],
    kernel: &Kernel,
    c_f: f64,
    a: f64,
    horizon_bound: f64,
) -> Result<LogDetChain> {
    check_ridge(a)?;
    let kd = KernelData::new(data, kernel)?;
    let t = data.len() as f64;
    let diagonal = (0..data.len())
        .map(|i| (kd.w[i] * kd.k[(i, i)] / a).ln_1p())
        .sum();
    let mean_w = kd.w.iter().sum::<f64>() / t;
    Ok(LogDetChain {
        log_det: kd.log_det(a)?,
        diagonal,
        mean_weight: t * (c_f * c_f * mean_w / a).ln_1p(),
        linearized: c_f * c_f * t * mean_w / a,
        horizon: c_f * c_f * horizon_bound / a,
    })
}

/// Coefficients `c = √W (√W K √W + aI)⁻¹ √W y` of the discounted kernel
/// ridge regression fit on the stream.
pub fn kernel_ridge_comparator(data: &[Observation], kernel: &Kernel, a: f64) -> Result<Vec<f64>> {
    check_ridge(a)?;
    if data.is_empty() {
        return Ok(Vec::new());
    }
    let kd = KernelData::new(data, kernel)?;
    let n = data.len();
    let rhs = kd.sqrt_w.component_mul(&kd.y);
    let z = spd_solve(&(kd.weighted_kernel() + DMatrix::identity(n, n) * a), &rhs)?;
    Ok(kd.sqrt_w.component_mul(&z).iter().copied().collect())
}
