mod common;

use clustersync::bounds::{compute_bounds, compute_bounds_complete, pinned_blocks};
use clustersync::matrices::{ClusterPartition, CouplingMatrix};
use clustersync::presets;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rho_positive_on_valid_instances(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let mut spec = common::random_consensus_spec(&mut rng, 2, 8, 3);
        spec.alpha = rng.gen_range(0.1..50.0);
        spec.beta = rng.gen_range(0.1..50.0);
        spec.eps1 = rng.gen_range(0.1..50.0);
        spec.eps2 = rng.gen_range(0.1..50.0);
        let blocks = pinned_blocks(&spec).unwrap();
        prop_assert!(blocks.rho1() > 0.0);
        prop_assert!(blocks.rho2() > 0.0);
    }

    #[test]
    fn t_max_decreases_with_gains(seed in any::<u64>(), delta in 0.0f64..3.0) {
        let mut rng = common::rng(seed);
        let mut spec = common::random_consensus_spec(&mut rng, 2, 8, 3);
        let (ra, rb) = (rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0));
        spec.eps1 = spec.alpha * ra;
        spec.eps2 = spec.beta * rb;
        let base = compute_bounds(&spec, delta).unwrap();
        let alpha0 = base.alpha_threshold * 1.01;
        let beta0 = base.beta_threshold * 1.01;
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let g = 1.5f64.powi(k);
            spec.alpha = alpha0 * g;
            spec.eps1 = spec.alpha * ra;
            spec.beta = beta0;
            spec.eps2 = spec.beta * rb;
            let r = compute_bounds(&spec, delta).unwrap();
            let t = r.t_max.unwrap();
            prop_assert!(t < last, "α step {}: {} !< {}", k, t, last);
            last = t;
        }
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let g = 1.5f64.powi(k);
            spec.alpha = alpha0;
            spec.eps1 = spec.alpha * ra;
            spec.beta = beta0 * g;
            spec.eps2 = spec.beta * rb;
            let t = compute_bounds(&spec, delta).unwrap().t_max.unwrap();
            prop_assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn t_max_recomputes_from_fields(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let mut spec = common::random_consensus_spec(&mut rng, 2, 8, 3);
        let probe = compute_bounds(&spec, 0.5).unwrap();
        spec.alpha = probe.alpha_threshold * rng.gen_range(1.1..4.0);
        spec.eps1 = spec.alpha;
        spec.beta = probe.beta_threshold * rng.gen_range(1.1..4.0);
        spec.eps2 = spec.beta;
        let r = compute_bounds(&spec, 0.5).unwrap();
        prop_assert!(r.feasible());
        let t = r.t_max.unwrap();
        let again = r.settling_from_fields().unwrap();
        prop_assert!((t - again).abs() <= 1e-12 * t);
    }

    #[test]
    fn single_cluster_agrees_with_complete(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = common::rng(seed);
        let mut spec = common::random_consensus_spec(&mut rng, 2, 1, 1);
        spec.partition = ClusterPartition::single(n).unwrap();
        spec.a = CouplingMatrix::new(common::random_a2(&mut rng, n)).unwrap();
        spec.b = CouplingMatrix::new(common::random_a2(&mut rng, n)).unwrap();
        spec.alpha = rng.gen_range(0.5..20.0);
        spec.eps1 = rng.gen_range(0.5..20.0);
        let k = compute_bounds(&spec, 0.0).unwrap();
        let c = compute_bounds_complete(&spec, 0.0).unwrap();
        prop_assert!((k.alpha_bar - c.alpha_bar).abs() <= 1e-12 * c.alpha_bar);
        prop_assert!((k.beta_bar - c.beta_bar).abs() <= 1e-12 * c.beta_bar);
        prop_assert_eq!(k.gamma1, 0.0);
        prop_assert_eq!(k.gamma2, 0.0);
    }
}

#[test]
fn example_thresholds_bracket_feasibility() {
    let r = compute_bounds(&presets::example_network(30.0, 135.0), presets::EXAMPLE_DELTA).unwrap();
    assert!(r.feasible());
    let below = compute_bounds(
        &presets::example_network(r.alpha_threshold * 0.999, 135.0),
        presets::EXAMPLE_DELTA,
    )
    .unwrap();
    assert!(!below.feasible_alpha && below.feasible_beta);
}
