//! Five-node, two-cluster network of chaotic 3-D neural oscillators.
//!
//! Clusters are `{0,1}` and `{2,3,4}`, `A = B`, pinning gains track the
//! coupling gains (`ε₁ = α`, `ε₂ = β`), `p = 0.5`, `q = 2`.

use alloc::vec;

use crate::dynamics::{Activation, IntrinsicDynamics, NetworkSpec, NeuralDynamics, DEFAULT_DEAD_ZONE};
use crate::linalg::Matrix;
use crate::matrices::{ClusterPartition, CouplingMatrix};

/// QUAD constant used with the chaotic dynamics.
pub const EXAMPLE_DELTA: f64 = 6.1;
pub const EXAMPLE_P: f64 = 0.5;
pub const EXAMPLE_Q: f64 = 2.0;
/// Gains of the headline run.
pub const EXAMPLE_ALPHA: f64 = 30.0;
pub const EXAMPLE_BETA: f64 = 130.0;

/// Values reported alongside the example network. Some of them are not
/// reproducible from the formulas; see `paper-example` in the CLI.
pub mod published {
    pub const RHO1: f64 = 0.6395;
    pub const RHO2: f64 = 0.4445;
    pub const N_BAR: usize = 18;
    pub const ALPHA_BAR_PER_ALPHA: f64 = 0.6013;
    pub const BETA_BAR_PER_BETA: f64 = 0.0988;
    pub const GAMMA1: f64 = 5.4385;
    pub const GAMMA2: f64 = 0.5091;
    pub const ALPHA_THRESHOLD: f64 = 29.3339;
    pub const BETA_THRESHOLD: f64 = 128.5617;
    pub const T_MAX: f64 = 7.3956;
    /// Also reported as 0.1375; the two disagree.
    pub const MEASURED_SETTLING: f64 = 0.1735;
}

/// Connection weights of the chaotic neural network.
pub fn chaotic_weights() -> Matrix {
    Matrix::from_rows(&[[1.25, -3.2, -3.2], [-3.2, 1.1, -4.4], [-3.2, 4.4, 1.0]]).unwrap()
}

/// `ẋ = -x + W Φ(x)` with the saturating activation.
pub fn chaotic_neural_dynamics() -> IntrinsicDynamics {
    IntrinsicDynamics::Neural(
        NeuralDynamics::new(
            Matrix::identity(3).scale(-1.0),
            chaotic_weights(),
            Activation::Saturation,
            vec![0.0; 3],
        )
        .unwrap(),
    )
}

pub fn example_partition() -> ClusterPartition {
    ClusterPartition::from_sizes(&[2, 3]).unwrap()
}

/// The 5x5 coupling matrix used for both `A` and `B`.
pub fn example_coupling() -> Matrix {
    Matrix::from_rows(&[
        [-1.0, 1.0, -0.1, 0.3, -0.2],
        [1.0, -1.0, 0.1, -0.3, 0.2],
        [-0.1, 0.1, -2.0, 1.0, 1.0],
        [0.3, -0.3, 1.0, -2.0, 1.0],
        [-0.2, 0.2, 1.0, 1.0, -2.0],
    ])
    .unwrap()
}

pub fn example_targets() -> alloc::vec::Vec<alloc::vec::Vec<f64>> {
    vec![vec![0.4, 0.1, -0.2], vec![0.1, 0.1, 0.1]]
}

/// The example network with coupling gains `alpha`, `beta` and pinning gains
/// equal to them.
pub fn example_network(alpha: f64, beta: f64) -> NetworkSpec {
    let a = CouplingMatrix::new(example_coupling()).unwrap();
    NetworkSpec {
        partition: example_partition(),
        b: a.clone(),
        a,
        alpha,
        beta,
        eps1: alpha,
        eps2: beta,
        p: EXAMPLE_P,
        q: EXAMPLE_Q,
        dynamics: chaotic_neural_dynamics(),
        target_initials: example_targets(),
        dead_zone: DEFAULT_DEAD_ZONE,
    }
}
