//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use clustersync::dynamics::{IntrinsicDynamics, NetworkSpec, DEFAULT_DEAD_ZONE};
use clustersync::matrices::{ClusterPartition, CouplingMatrix};
use clustersync::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric, nonnegative off-diagonal, zero row sums, connected: a random
/// spanning path plus random extra edges.
pub fn random_a2(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for w in order.windows(2) {
        let v = rng.gen_range(0.2..2.0);
        a[(w[0], w[1])] = v;
        a[(w[1], w[0])] = v;
    }
    for i in 0..n {
        for j in i + 1..n {
            if a[(i, j)] == 0.0 && rng.gen_bool(0.3) {
                let v = rng.gen_range(0.1..2.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
    }
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
        a[(i, i)] = -s;
    }
    a
}

/// Random block with zero row and column sums (double-centred noise).
pub fn zero_sum_block(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let raw = Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale));
    let row_mean: Vec<f64> = (0..rows).map(|i| raw.row(i).iter().sum::<f64>() / cols as f64).collect();
    let col_mean: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| raw[(i, j)]).sum::<f64>() / rows as f64)
        .collect();
    let mean = row_mean.iter().sum::<f64>() / rows as f64;
    Matrix::from_fn(rows, cols, |i, j| raw[(i, j)] - row_mean[i] - col_mean[j] + mean)
}

/// Symmetric matrix with connected diagonal blocks and zero-sum couplings
/// between clusters of magnitude about `inter`.
pub fn random_a4(rng: &mut impl Rng, part: &ClusterPartition, inter: f64) -> Matrix {
    let n = part.num_nodes();
    let mut a = Matrix::zeros(n, n);
    let m = part.num_clusters();
    for k in 0..m {
        let rk = part.range(k);
        let blk = random_a2(rng, rk.len());
        for (bi, i) in rk.clone().enumerate() {
            for (bj, j) in rk.clone().enumerate() {
                a[(i, j)] = blk[(bi, bj)];
            }
        }
        for kp in k + 1..m {
            let rp = part.range(kp);
            let blk = zero_sum_block(rng, rk.len(), rp.len(), inter);
            for (bi, i) in rk.clone().enumerate() {
                for (bj, j) in rp.clone().enumerate() {
                    a[(i, j)] = blk[(bi, bj)];
                    a[(j, i)] = blk[(bi, bj)];
                }
            }
        }
    }
    a
}

pub fn random_sizes(rng: &mut impl Rng, max_nodes: usize, max_clusters: usize) -> Vec<usize> {
    let m = rng.gen_range(1..=max_clusters);
    let mut sizes = vec![1; m];
    let extra = rng.gen_range(0..=max_nodes - m);
    for _ in 0..extra {
        let k = rng.gen_range(0..m);
        sizes[k] += 1;
    }
    sizes
}

/// A consensus network (`f = 0`) on a random A4 instance.
pub fn random_consensus_spec(rng: &mut impl Rng, dim: usize, max_nodes: usize, max_clusters: usize) -> NetworkSpec {
    let part = ClusterPartition::from_sizes(&random_sizes(rng, max_nodes, max_clusters)).unwrap();
    let a = random_a4(rng, &part, 0.3);
    let b = random_a4(rng, &part, 0.3);
    let targets = (0..part.num_clusters())
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    NetworkSpec {
        partition: part,
        a: CouplingMatrix::new(a).unwrap(),
        b: CouplingMatrix::new(b).unwrap(),
        alpha: 1.0,
        beta: 1.0,
        eps1: 1.0,
        eps2: 1.0,
        p: rng.gen_range(0.3..0.8),
        q: rng.gen_range(1.5..2.5),
        dynamics: IntrinsicDynamics::Zero { dim },
        target_initials: targets,
        dead_zone: DEFAULT_DEAD_ZONE,
    }
}

/// `P A Pᵀ` for the permutation `perm` (new index `i` is old `perm[i]`).
pub fn permute(a: &Matrix, perm: &[usize]) -> Matrix {
    Matrix::from_fn(a.rows(), a.cols(), |i, j| a[(perm[i], perm[j])])
}
