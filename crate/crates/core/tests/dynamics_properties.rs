mod common;

use clustersync::bounds::{default_eps_grid, estimate_delta};
use clustersync::dynamics::{
    cluster_rhs, complete_rhs, intrinsic_f, master_slave_rhs, sig_pow, Activation,
    IntrinsicDynamics, NeuralDynamics, SystemState,
};
use clustersync::matrices::{ClusterPartition, CouplingMatrix};
use clustersync::presets;
use clustersync::Matrix;
use proptest::prelude::*;
use rand::Rng;

fn random_state(rng: &mut impl Rng, nodes: usize, targets: usize, dim: usize) -> SystemState {
    let x = (0..nodes * dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let s = (0..targets * dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
    SystemState::new(x, s, dim, 0.0).unwrap()
}

fn dot_diff(fx: &[f64], fy: &[f64], x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut inner = 0.0;
    let mut sq = 0.0;
    for l in 0..x.len() {
        let d = x[l] - y[l];
        inner += d * (fx[l] - fy[l]);
        sq += d * d;
    }
    (inner, sq)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sig_pow_is_odd(x in prop::collection::vec(-1e3f64..1e3, 1..6), r in 0.05f64..4.0) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = sig_pow(&x, r);
        let b = sig_pow(&neg, r);
        for (u, v) in a.iter().zip(&b) {
            prop_assert_eq!(*u, -*v);
        }
    }

    #[test]
    fn single_cluster_matches_complete(seed in any::<u64>(), n in 1usize..7, dim in 1usize..4) {
        let mut rng = common::rng(seed);
        let mut spec = common::random_consensus_spec(&mut rng, dim, 1, 1);
        spec.partition = ClusterPartition::single(n).unwrap();
        spec.a = CouplingMatrix::new(common::random_a2(&mut rng, n)).unwrap();
        spec.b = CouplingMatrix::new(common::random_a2(&mut rng, n)).unwrap();
        spec.alpha = rng.gen_range(0.5..5.0);
        spec.beta = rng.gen_range(0.5..5.0);
        spec.eps1 = rng.gen_range(0.5..5.0);
        spec.eps2 = rng.gen_range(0.5..5.0);
        let state = random_state(&mut rng, n, 1, dim);
        let a = cluster_rhs(&spec, &state).unwrap();
        let b = complete_rhs(&spec, &state).unwrap();
        for (u, v) in a.nodes.iter().zip(&b.nodes) {
            prop_assert!((u - v).abs() <= 1e-14, "{} vs {}", u, v);
        }
        prop_assert_eq!(a.targets, b.targets);
    }

    #[test]
    fn single_node_matches_master_slave(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let mut spec = presets::example_network(1.0, 1.0);
        spec.partition = ClusterPartition::single(1).unwrap();
        spec.a = CouplingMatrix::from_rows(&[[0.0]]).unwrap();
        spec.b = spec.a.clone();
        spec.target_initials.truncate(1);
        spec.eps1 = rng.gen_range(0.1..10.0);
        spec.eps2 = rng.gen_range(0.1..10.0);
        let state = random_state(&mut rng, 1, 1, 3);
        let a = cluster_rhs(&spec, &state).unwrap();
        let (dx, ds) = master_slave_rhs(
            spec.eps1, spec.eps2, spec.p, spec.q, &spec.dynamics, &state.nodes, &state.targets,
        ).unwrap();
        for (u, v) in a.nodes.iter().zip(&dx) {
            prop_assert!((u - v).abs() <= 1e-14);
        }
        prop_assert_eq!(a.targets, ds);
    }

    #[test]
    fn consensus_rhs_is_translation_invariant(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let spec = common::random_consensus_spec(&mut rng, 2, 7, 3);
        let state = random_state(&mut rng, spec.num_nodes(), spec.num_clusters(), 2);
        let c = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let shift = |v: &[f64]| -> Vec<f64> { v.iter().enumerate().map(|(i, x)| x + c[i % 2]).collect() };
        let moved = SystemState::new(shift(&state.nodes), shift(&state.targets), 2, 0.0).unwrap();
        let a = cluster_rhs(&spec, &state).unwrap();
        let b = cluster_rhs(&spec, &moved).unwrap();
        for (u, v) in a.nodes.iter().zip(&b.nodes) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + u.abs()), "{} vs {}", u, v);
        }
    }

    #[test]
    fn chaotic_dynamics_satisfy_quad(seed in any::<u64>()) {
        let f = presets::chaotic_neural_dynamics();
        let delta = estimate_delta(&f, &default_eps_grid()).unwrap().best();
        let mut rng = common::rng(seed);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let (inner, sq) = dot_diff(&intrinsic_f(&f, &x).unwrap(), &intrinsic_f(&f, &y).unwrap(), &x, &y);
            prop_assert!(inner <= delta * sq + 1e-12, "{} > {}", inner, delta * sq);
        }
    }

    #[test]
    fn random_neural_dynamics_satisfy_quad(seed in any::<u64>(), tanh in any::<bool>()) {
        let mut rng = common::rng(seed);
        let w1 = Matrix::from_fn(3, 3, |i, j| if i == j { -rng.gen_range(0.5..2.0) } else { rng.gen_range(-0.5..0.5) });
        let w2 = Matrix::from_fn(3, 3, |_, _| rng.gen_range(-3.0..3.0));
        let act = if tanh { Activation::Tanh } else { Activation::Saturation };
        let bias = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = IntrinsicDynamics::Neural(NeuralDynamics::new(w1, w2, act, bias).unwrap());
        let delta = estimate_delta(&f, &default_eps_grid()).unwrap().best();
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let (inner, sq) = dot_diff(&intrinsic_f(&f, &x).unwrap(), &intrinsic_f(&f, &y).unwrap(), &x, &y);
            prop_assert!(inner <= delta * sq + 1e-12);
        }
    }
}

/// Coupling terms are mirrored; only node 0 carries the pinning terms.
#[test]
fn mirrored_pair_has_mirrored_coupling() {
    let mut spec = common::random_consensus_spec(&mut common::rng(3), 1, 1, 1);
    spec.partition = ClusterPartition::single(2).unwrap();
    spec.a = CouplingMatrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]).unwrap();
    spec.b = spec.a.clone();
    spec.target_initials = vec![vec![0.5]];
    let state = SystemState::new(vec![0.5 + 0.3, 0.5 - 0.3], vec![0.5], 1, 0.0).unwrap();
    let d = cluster_rhs(&spec, &state).unwrap();
    let e: f64 = 0.3;
    let pin = -spec.eps1 * e.powf(spec.p) - spec.eps2 * e.powf(spec.q);
    assert!((d.nodes[0] + d.nodes[1] - pin).abs() < 1e-14);
}
