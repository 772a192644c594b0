//! Log-space helpers shared by the aggregation engines.

/// `ln Σ exp(x_i)` with max-subtraction.
///
/// Returns `-inf` for an empty slice or when every entry is `-inf`; a `+inf`
/// entry yields `+inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    log_sum_exp_iter(xs.iter().copied())
}

pub fn log_sum_exp_iter<I>(xs: I) -> f64
where
    I: IntoIterator<Item = f64> + Clone,
{
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled_sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled_sum = self.scaled_sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled_sum += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled_sum.ln()
        }
    }
}

/// Probability weights `softmax(x)`; entries at `-inf` get weight zero.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let norm = log_sum_exp(xs);
    xs.iter().map(|&x| (x - norm).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_sum() {
        let xs = [0.1, -2.0, 3.5, 0.0];
        let naive: f64 = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-14);
    }

    #[test]
    fn lse_survives_large_magnitudes() {
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp(&[800.0, 800.0]);
        assert!((v - (800.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn lse_infinities() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
    }

    #[test]
    fn streaming_agrees_with_batch() {
        let xs = [1.0, 7.0, -3.0, 7.0, f64::NEG_INFINITY, 2.5];
        let mut acc = LogSumExp::default();
        for &x in &xs {
            acc.push(x);
        }
        assert!((acc.value() - log_sum_exp(&xs)).abs() < 1e-13);
    }

    #[test]
    fn softmax_sums_to_one() {
        let w = softmax(&[0.0, (2.0f64).ln(), f64::NEG_INFINITY]);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(w[2], 0.0);
    }
}
