use dexp_core::regression::bounds::{
    discount_weights, kernel_ridge_comparator, kernreg_bound, log_det_chain, ridge_comparator,
    DiscountedGram,
};
use dexp_core::regression::linalg::{det_identity_sides, min_difference_sides, push_through_sides};
use dexp_core::regression::{DetMode, KernRegState, Kernel, LinRegState, Observation};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0))
}

fn random_stream(rng: &mut ChaCha8Rng, dim: usize, t: usize, alpha_lo: f64) -> Vec<Observation> {
    let truth: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    (0..t)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let signal: f64 = 0.5 + 0.3 * x.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>();
            let y = (signal + rng.random_range(-0.2..0.2)).clamp(0.0, 1.0);
            Observation {
                x,
                y,
                alpha: rng.random_range(alpha_lo..=1.0),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn push_through_identity(seed in any::<u64>(), n in 1usize..7, m in 1usize..7, a in 0.1..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_matrix(&mut rng, n, m);
        let c = random_matrix(&mut rng, m, n);
        let (left, right) = push_through_sides(&b, &c, a).unwrap();
        prop_assert!((left - right).abs().max() < 1e-8);
    }

    #[test]
    fn determinant_identity(seed in any::<u64>(), n in 1usize..7, m in 1usize..7, a in 0.1..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_matrix(&mut rng, n, m);
        let c = b.transpose() + random_matrix(&mut rng, m, n) * 0.3;
        let (large, small) = det_identity_sides(&b, &c, a).unwrap();
        prop_assert!((large - small).abs() <= 1e-8 * large.abs().max(small.abs()).max(1e-300));
    }

    #[test]
    fn shifted_quadratic_minima(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, n);
        let a = &m * m.transpose() + DMatrix::identity(n, n);
        let b = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let z = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let (direct, closed) = min_difference_sides(&a, &b, &z).unwrap();
        prop_assert!((direct - closed).abs() < 1e-8 * (1.0 + closed.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dot_kernel_reproduces_linear_predictions(seed in any::<u64>(), dim in 1usize..5, t in 1usize..40, heavy in any::<bool>(), a in 0.2..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = random_stream(&mut rng, dim, t, 0.3);
        if heavy {
            data.iter_mut().for_each(|o| o.alpha = 0.3);
        }
        let mut lin = LinRegState::new(dim, a, 0.0, 1.0).unwrap();
        let mut kern = KernRegState::new(Kernel::Dot, dim, a, 0.0, 1.0).unwrap();
        for obs in &data {
            let gl = lin.predict(obs.alpha, &obs.x).unwrap();
            let gk = kern.predict(obs.alpha, &obs.x).unwrap();
            prop_assert!((gl - gk).abs() < 1e-8, "{gl} vs {gk}");
            lin.update(obs.alpha, &obs.x, obs.y, gl).unwrap();
            kern.update(obs.alpha, &obs.x, obs.y, gk).unwrap();
        }
    }

    #[test]
    fn quadratic_expansion_matches_direct_sum(seed in any::<u64>(), dim in 1usize..6, t in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_stream(&mut rng, dim, t, 0.2);
        let gram = DiscountedGram::from_observations(dim, &data).unwrap();
        let w = discount_weights(&data).unwrap();
        let theta: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let direct: f64 = data
            .iter()
            .zip(&w)
            .map(|(o, w)| w * (o.x.iter().zip(&theta).map(|(x, th)| x * th).sum::<f64>() - o.y).powi(2))
            .sum();
        let expanded = gram.comparator_loss(&theta).unwrap();
        prop_assert!((direct - expanded).abs() < 1e-9 * (1.0 + direct));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn linear_bound_holds_at_every_prefix(seed in any::<u64>(), dim in 1usize..6, a in 0.3..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_stream(&mut rng, dim, 120, 0.5);
        let thetas: Vec<Vec<f64>> = (0..10).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut s = LinRegState::new(dim, a, 0.0, 1.0).unwrap();
        let mut gram = DiscountedGram::new(dim);
        for obs in &data {
            let g = s.predict(obs.alpha, &obs.x).unwrap();
            s.update(obs.alpha, &obs.x, obs.y, g).unwrap();
            gram.push(obs.alpha, &obs.x, obs.y).unwrap();
            let ridge = gram.ridge(a).unwrap();
            for theta in thetas.iter().chain(std::iter::once(&ridge)) {
                let det = gram.linreg_bound(theta, a, 0.0, 1.0, DetMode::Determinant).unwrap();
                let inf = gram.linreg_bound(theta, a, 0.0, 1.0, DetMode::InfinityNorm).unwrap();
                prop_assert!(det - s.learner_loss() >= -1e-7);
                prop_assert!(inf >= det - 1e-9);
            }
        }
    }

    #[test]
    fn kernel_bound_holds_against_kernel_ridge(seed in any::<u64>(), sigma in 0.3..2.0f64, a in 0.3..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_stream(&mut rng, 2, 60, 0.6);
        let kernel = Kernel::Rbf { sigma };
        let mut s = KernRegState::new(kernel, 2, a, 0.0, 1.0).unwrap();
        for (t, obs) in data.iter().enumerate() {
            let g = s.predict(obs.alpha, &obs.x).unwrap();
            s.update(obs.alpha, &obs.x, obs.y, g).unwrap();
            let prefix = &data[..=t];
            let coeffs = kernel_ridge_comparator(prefix, &kernel, a).unwrap();
            let bound = kernreg_bound(prefix, &coeffs, &kernel, a, 0.0, 1.0).unwrap();
            prop_assert!(bound - s.learner_loss() >= -1e-6);
        }
    }

    #[test]
    fn log_det_chain_is_ordered(seed in any::<u64>(), alpha in 0.3..0.99f64, sigma in 0.3..2.0f64, a in 0.2..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = random_stream(&mut rng, 3, 80, 0.5);
        data.iter_mut().for_each(|o| o.alpha = alpha);
        let chain = log_det_chain(&data, &Kernel::Rbf { sigma }, 1.0, a, 1.0 / (1.0 - alpha)).unwrap();
        prop_assert!(chain.max_violation() <= 1e-9, "{:?}", chain);
    }

    #[test]
    fn ridge_optimum_has_zero_gradient(seed in any::<u64>(), dim in 1usize..5, a in 0.1..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_stream(&mut rng, dim, 30, 0.4);
        let gram = DiscountedGram::from_observations(dim, &data).unwrap();
        let theta = ridge_comparator(&data, dim, a).unwrap();
        let objective = |th: &[f64]| gram.comparator_loss(th).unwrap() + a * th.iter().map(|v| v * v).sum::<f64>();
        let h = 1e-5;
        for i in 0..dim {
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[i] += h;
            down[i] -= h;
            prop_assert!(((objective(&up) - objective(&down)) / (2.0 * h)).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// Undiscounted runs against the classic recursion that keeps `A⁻¹`
    /// current with Sherman-Morrison rank-one updates.
    #[test]
    fn undiscounted_run_is_the_classic_recursion(seed in any::<u64>(), dim in 1usize..6, a in 0.2..3.0f64, lo in -2.0..0.5f64) {
        let hi = lo + 1.5;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = LinRegState::new(dim, a, lo, hi).unwrap();
        let mut inv = DMatrix::<f64>::identity(dim, dim) / a;
        let mut b = DVector::<f64>::zeros(dim);
        let mid = 0.5 * (lo + hi);
        for _ in 0..150 {
            let x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
            let y = rng.random_range(lo..=hi);
            let ax = &inv * &x;
            inv -= &ax * ax.transpose() / (1.0 + x.dot(&ax));
            let expected = (&b + &x * mid).dot(&(&inv * &x));
            let gamma = s.predict(1.0, x.as_slice()).unwrap();
            prop_assert!((gamma - expected).abs() < 1e-9, "{gamma} vs {expected}");
            s.update(1.0, x.as_slice(), y, gamma).unwrap();
            b += &x * y;
        }
    }
}
