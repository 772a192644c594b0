//! Online kernel ridge regression with discounting.
//!
//! With history `x_1..x_{T-1}`, outcomes `Y_{T-1}` and weights
//! `w_t = β_t/β_T` (and `w_T = 1`), the prediction is
//!
//! ```text
//! γ_T = (Y_{T-1}; m)' √W (aI + √W K_T √W)⁻¹ √W k_T
//! ```
//!
//! where `K_T` is the kernel matrix of `x_1..x_T`, `k_T` its last column and
//! `m = (Y₁+Y₂)/2`. The `T×T` system is rebuilt every step; points whose
//! weight drops below the truncation threshold are forgotten.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::spd_solve;
use super::{check_interval, check_ridge, check_y, DEFAULT_TRUNCATION};
use crate::discounting::{accumulate, check_alpha, DiscountLedger};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Kernel {
    /// `⟨x, y⟩`.
    Dot,
    /// `exp(-‖x - y‖²/(2σ²))`.
    Rbf { sigma: f64 },
    /// `(⟨x, y⟩ + c0)^degree`.
    Polynomial { degree: u32, c0: f64 },
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Dot => dot(x, y),
            Kernel::Rbf { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            Kernel::Polynomial { degree, c0 } => (dot(x, y) + c0).powi(degree as i32),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidParameter(format!("RBF width must be positive, got {sigma}")),
            ),
            Kernel::Polynomial { degree: 0, .. } => Err(Error::InvalidParameter(
                "polynomial degree must be positive".into(),
            )),
            Kernel::Polynomial { c0, .. } if !(c0 >= 0.0) => Err(Error::InvalidParameter(format!(
                "polynomial offset must be non-negative, got {c0}"
            ))),
            _ => Ok(()),
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernRegState {
    kernel: Kernel,
    a: f64,
    y_lo: f64,
    y_hi: f64,
    dim: usize,
    truncation: f64,
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    log_betas: Vec<f64>,
    ledger: DiscountLedger,
    learner_loss: f64,
}

impl KernRegState {
    pub fn new(kernel: Kernel, dim: usize, a: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        kernel.validate()?;
        check_ridge(a)?;
        check_interval(y_lo, y_hi)?;
        Ok(Self {
            kernel,
            a,
            y_lo,
            y_hi,
            dim,
            truncation: DEFAULT_TRUNCATION,
            xs: Vec::new(),
            ys: Vec::new(),
            log_betas: Vec::new(),
            ledger: DiscountLedger::new(),
            learner_loss: 0.0,
        })
    }

    /// Sets the relative weight below which past points are dropped; zero
    /// keeps the whole history.
    pub fn with_truncation(mut self, threshold: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&threshold) {
            return Err(Error::InvalidParameter(format!(
                "truncation threshold must lie in [0,1), got {threshold}"
            )));
        }
        self.truncation = threshold;
        Ok(self)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn ridge(&self) -> f64 {
        self.a
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Number of past points currently kept.
    pub fn support_len(&self) -> usize {
        self.xs.len()
    }

    pub fn ledger(&self) -> &DiscountLedger {
        &self.ledger
    }

    pub fn learner_loss(&self) -> f64 {
        self.learner_loss
    }

    pub fn predict(&self, alpha: f64, x: &[f64]) -> Result<f64> {
        check_alpha(alpha)?;
        self.check_x(x)?;
        let log_beta_t = self.ledger.advance(alpha)?.log_beta();
        let n = self.xs.len() + 1;
        let sqrt_w = DVector::from_iterator(
            n,
            self.log_betas
                .iter()
                .map(|lb| (0.5 * (lb - log_beta_t)).exp())
                .chain([1.0]),
        );
        let points: Vec<&[f64]> = self.xs.iter().map(Vec::as_slice).chain([x]).collect();
        let mut system = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.kernel.eval(points[i], points[j]) * sqrt_w[i] * sqrt_w[j];
                system[(i, j)] = v;
                system[(j, i)] = v;
            }
            system[(i, i)] += self.a;
        }
        let rhs = DVector::from_iterator(
            n,
            (0..n).map(|i| sqrt_w[i] * self.kernel.eval(points[i], x)),
        );
        let z = spd_solve(&system, &rhs)?;
        let mid = 0.5 * (self.y_lo + self.y_hi);
        Ok(self
            .ys
            .iter()
            .chain([&mid])
            .zip(sqrt_w.iter().zip(z.iter()))
            .map(|(y, (s, z))| y * s * z)
            .sum())
    }

    pub fn update(&mut self, alpha: f64, x: &[f64], y: f64, prediction: f64) -> Result<()> {
        check_y(y, self.y_lo, self.y_hi)?;
        self.check_x(x)?;
        self.ledger = self.ledger.advance(alpha)?;
        self.xs.push(x.to_vec());
        self.ys.push(y);
        self.log_betas.push(self.ledger.log_beta());
        self.learner_loss = accumulate(self.learner_loss, alpha, (prediction - y).powi(2));
        if self.truncation > 0.0 {
            let cutoff = self.ledger.log_beta() + self.truncation.ln();
            let drop = self.log_betas.iter().take_while(|&&lb| lb < cutoff).count();
            if drop > 0 {
                self.xs.drain(..drop);
                self.ys.drain(..drop);
                self.log_betas.drain(..drop);
            }
        }
        Ok(())
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::LinRegState;

    #[test]
    fn kernel_values() {
        assert_eq!(Kernel::Dot.eval(&[1.0, 2.0], &[3.0, -1.0]), 1.0);
        let r = Kernel::Rbf { sigma: 2.0 }.eval(&[0.0], &[2.0]);
        assert!((r - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(
            Kernel::Polynomial { degree: 2, c0: 1.0 }.eval(&[1.0], &[2.0]),
            9.0
        );
        assert!(Kernel::Rbf { sigma: 0.0 }.validate().is_err());
    }

    #[test]
    fn empty_history_prediction() {
        let s = KernRegState::new(Kernel::Rbf { sigma: 1.0 }, 1, 2.0, 0.0, 1.0).unwrap();
        // m k(x,x)/(a + k(x,x)) = 0.5/3.
        assert!((s.predict(1.0, &[0.3]).unwrap() - 0.5 / 3.0).abs() < 1e-15);
        let s = KernRegState::new(Kernel::Dot, 2, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(s.predict(1.0, &[0.3, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn dot_kernel_equals_linear() {
        let mut lin = LinRegState::new(2, 0.6, 0.0, 1.0).unwrap();
        let mut ker = KernRegState::new(Kernel::Dot, 2, 0.6, 0.0, 1.0).unwrap();
        let stream = [
            ([0.4, -1.0], 0.3, 0.3),
            ([1.0, 0.2], 0.8, 0.9),
            ([0.0, 0.5], 0.1, 0.3),
            ([0.7, 0.7], 1.0, 0.5),
        ];
        for (x, y, alpha) in stream {
            let gl = lin.predict(alpha, &x).unwrap();
            let gk = ker.predict(alpha, &x).unwrap();
            assert!((gl - gk).abs() < 1e-12);
            lin.update(alpha, &x, y, gl).unwrap();
            ker.update(alpha, &x, y, gk).unwrap();
        }
        assert!((lin.learner_loss() - ker.learner_loss()).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_oracle() {
        // Explicit evaluation of the closed form with α = 0.8, three points.
        let k = Kernel::Rbf { sigma: 0.7 };
        let xs = [[0.1], [0.5], [0.9]];
        let ys = [0.2, 0.7];
        let mut s = KernRegState::new(k, 1, 1.5, 0.0, 1.0).unwrap();
        for i in 0..2 {
            let g = s.predict(0.8, &xs[i]).unwrap();
            s.update(0.8, &xs[i], ys[i], g).unwrap();
        }
        let w = [0.64f64, 0.8, 1.0];
        let mut m = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = w[i].sqrt() * k.eval(&xs[i], &xs[j]) * w[j].sqrt();
            }
            m[(i, i)] += 1.5;
        }
        let kv = DVector::from_iterator(3, (0..3).map(|i| w[i].sqrt() * k.eval(&xs[i], &xs[2])));
        let sol = m.lu().solve(&kv).unwrap();
        let yv = [0.2, 0.7, 0.5];
        let expected: f64 = (0..3).map(|i| yv[i] * w[i].sqrt() * sol[i]).sum();
        assert!((s.predict(0.8, &xs[2]).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn heavy_discounting_truncates_history() {
        let mut s = KernRegState::new(Kernel::Rbf { sigma: 1.0 }, 1, 1.0, 0.0, 1.0).unwrap();
        for i in 0..40 {
            let x = [i as f64 * 0.1];
            let g = s.predict(0.3, &x).unwrap();
            s.update(0.3, &x, 0.5, g).unwrap();
        }
        // 0.3^k ≥ 1e-12 keeps k ≤ 22 older points plus the newest.
        assert_eq!(s.support_len(), 23);
    }
}
