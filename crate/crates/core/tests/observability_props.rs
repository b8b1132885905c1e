mod common;

use common::{collinear_pair, random_scenario};
use nalgebra::SymmetricEigen;
use obskit_core::trajectory::{block_offsets, state_dim};
use obskit_core::{check_observable, gramian, RankDecision};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gramian_is_symmetric_psd_and_block_diagonal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(s) = random_scenario(&mut rng) else { return Ok(()) };
        let g = gramian(&s, 101).unwrap();
        let orders = s.model_orders();
        prop_assert_eq!(g.nrows(), state_dim(&orders));
        prop_assert_eq!(&g, &g.transpose());
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        let top = eig.max();
        prop_assert!(eig.iter().all(|&l| l >= -1e-12 * top));

        let offs = block_offsets(&orders);
        for (i, (&pi, &oi)) in orders.iter().zip(&offs).enumerate() {
            for (j, (&pj, &oj)) in orders.iter().zip(&offs).enumerate() {
                if i == j { continue; }
                let block = g.view((oi, oj), (2 * (pi + 1), 2 * (pj + 1)));
                prop_assert!(block.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn an_unobservable_block_makes_the_system_unobservable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(s) = random_scenario(&mut rng) else { return Ok(()) };
        let report = check_observable(&s, 1e-8).unwrap();
        if report.target_blocks.iter().any(|b| b.rank_decision == RankDecision::Unobservable) {
            prop_assert_eq!(report.rank_decision, RankDecision::Unobservable);
        }
        let worst = report.target_blocks.iter().map(|b| b.sigma_ratio).fold(f64::INFINITY, f64::min);
        // Singular values carry absolute error near eps * sigma_max.
        prop_assert!(report.sigma_ratio <= worst * (1.0 + 1e-6) + 64.0 * f64::EPSILON);
    }

    #[test]
    fn model_order_at_observer_order_is_unobservable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(mut s) = random_scenario(&mut rng) else { return Ok(()) };
        let n_obs = s.observer.order();
        s.targets[0].model_order = n_obs;
        let report = check_observable(&s, 1e-8).unwrap();
        prop_assert_eq!(report.rank_decision, RankDecision::Unobservable);
        prop_assert_eq!(report.target_blocks[0].rank_decision, RankDecision::Unobservable);
    }

    #[test]
    fn collinear_pairs_are_unobservable(alpha in prop_oneof![0.3..3.0f64, -3.0..-0.3f64]) {
        let s = collinear_pair(alpha);
        let report = check_observable(&s, 1e-8).unwrap();
        prop_assert_eq!(report.rank_decision, RankDecision::Unobservable);
        prop_assert!(report.sigma_ratio < 1e-10);
        prop_assert!(report.null_witness_residual.unwrap() < 1e-6);
        prop_assert_eq!(report.collinearity_events.len(), 1);
    }
}

#[test]
fn simpson_gramian_converges_at_fourth_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 20 {
        let Some(s) = random_scenario(&mut rng) else { continue };
        let reference = gramian(&s, 8001).unwrap();
        let err = |n| (&gramian(&s, n).unwrap() - &reference).abs().max() / reference.abs().max();
        let (coarse, fine) = (err(101), err(201));
        assert!(coarse < 1e-5, "relative quadrature error {coarse}");
        assert!(fine < coarse / 8.0 || fine < 1e-12, "{coarse} -> {fine}");
        checked += 1;
    }
}
