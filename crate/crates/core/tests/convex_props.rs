use dexp_core::convex::{default_rate_scale, hoeffding_gap, ConvexAggState};
use dexp_core::games::GameSpec;
use dexp_core::Aggregator;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recomputes `η_t (L_t - L_t^k) - (η_t/(8β_t)) Σ β_τ η_τ` from the raw
/// scaled losses with explicit β products.
fn identity_oracle(alphas: &[f64], learner: &[f64], expert: &[f64], a: f64) -> f64 {
    let t = alphas.len();
    let mut betas = vec![1.0];
    for i in 1..t {
        betas.push(betas[i - 1] / alphas[i]);
    }
    let mut big_b = 0.0;
    let etas: Vec<f64> = betas
        .iter()
        .map(|b| {
            big_b += b;
            a * (b / big_b).sqrt()
        })
        .collect();
    let last = betas[t - 1];
    let disc = |l: &[f64]| betas.iter().zip(l).map(|(b, x)| b * x).sum::<f64>() / last;
    let s: f64 = betas.iter().zip(&etas).map(|(b, e)| b * e).sum::<f64>() / last;
    etas[t - 1] * (disc(learner) - disc(expert)) - etas[t - 1] * s / 8.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn bound_and_identity_on_random_runs(seed in any::<u64>(), k in 1usize..12, absolute in any::<bool>()) {
        let game = if absolute { GameSpec::absolute(0.0, 1.0) } else { GameSpec::square(-1.0, 1.0) }.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = ConvexAggState::new(game, k).unwrap();
        let (lo, hi) = (game.y_lo(), game.y_hi());
        let (mut alphas, mut learner, mut experts) = (vec![], vec![], vec![vec![]; k]);
        for step in 0..60 {
            let alpha = rng.random_range(0.3..=1.0);
            let preds: Vec<f64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
            let gamma = s.predict(alpha, &preds).unwrap();
            let y = if gamma < 0.5 * (lo + hi) { hi } else { lo };
            s.update(alpha, &preds, gamma, y).unwrap();
            alphas.push(alpha);
            learner.push(game.loss(gamma, y).unwrap() / s.scale());
            for (e, p) in preds.iter().enumerate() {
                experts[e].push(game.loss(*p, y).unwrap() / s.scale());
            }
            let best = s.expert_losses().iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(s.learner_loss() <= best + s.bound() + 1e-9, "step {step}");
            prop_assert!(s.log_weight_sum() <= 1e-12);
            prop_assert!(s.last_rho() <= 1.0 + 1e-15);
            for e in 0..k {
                let expected = identity_oracle(&alphas, &learner, &experts[e], default_rate_scale(k));
                prop_assert!((s.log_weights()[e] - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn weight_routes_agree(seed in any::<u64>(), k in 2usize..10) {
        let game = GameSpec::absolute(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = ConvexAggState::new(game, k).unwrap();
        for _ in 0..100 {
            let alpha = rng.random_range(0.2..=1.0);
            let preds: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=1.0)).collect();
            let w1 = s.mixing_weights(alpha).unwrap();
            let w2 = s.loss_based_weights(alpha).unwrap();
            let g1: f64 = w1.iter().zip(&preds).map(|(w, p)| w * p).sum();
            let g2: f64 = w2.iter().zip(&preds).map(|(w, p)| w * p).sum();
            prop_assert!((g1 - g2).abs() < 1e-10);
            let gamma = s.predict(alpha, &preds).unwrap();
            s.update(alpha, &preds, gamma, rng.random_range(0.0..=1.0)).unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hoeffding_inequality(
        wl in prop::collection::vec((0.001..1.0f64, 0.0..=1.0f64), 1..20),
        eta in 0.0..10.0f64,
    ) {
        let total: f64 = wl.iter().map(|p| p.0).sum();
        let w: Vec<f64> = wl.iter().map(|p| p.0 / total).collect();
        let l: Vec<f64> = wl.iter().map(|p| p.1).collect();
        prop_assert!(hoeffding_gap(&w, &l, eta) >= -1e-12);
    }
}

#[test]
fn undiscounted_bound_is_square_root_of_t_log_k() {
    let game = GameSpec::absolute(0.0, 1.0).unwrap();
    let k = 5;
    let mut s = ConvexAggState::new(game, k).unwrap();
    for t in 1..=300 {
        let preds: Vec<f64> = (0..k).map(|i| ((i * t) % 7) as f64 / 6.0).collect();
        let gamma = s.predict(1.0, &preds).unwrap();
        s.update(1.0, &preds, gamma, (t % 2) as f64).unwrap();
        assert!((s.bound() - (t as f64 * (k as f64).ln()).sqrt()).abs() < 1e-9);
    }
}
