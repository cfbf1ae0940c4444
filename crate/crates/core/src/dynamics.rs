//! Node dynamics, the signed power map and the protocol right-hand sides.
//!
//! States are stored flat: node `i` occupies `nodes[i*n..(i+1)*n]` and target
//! `k` occupies `targets[k*n..(k+1)*n]`, where `n` is the state dimension.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{bail, Error, Result};
use crate::linalg::Matrix;
use crate::math::{abs, powf, sqrt};
use crate::matrices::{diagnose_a4, ClusterPartition, CouplingMatrix};

/// Below this magnitude `sig^r` with `r < 1` returns exactly zero.
pub const DEFAULT_DEAD_ZONE: f64 = 1e-12;

/// `sign(v)|v|^r`, with the dead zone applied when `r < 1`.
#[inline]
pub fn signed_pow(v: f64, r: f64, dead_zone: f64) -> f64 {
    let a = abs(v);
    if a == 0.0 || (r < 1.0 && a < dead_zone) {
        return 0.0;
    }
    let mag = if r == 1.0 {
        a
    } else if r == 2.0 {
        a * a
    } else if r == 0.5 {
        sqrt(a)
    } else {
        powf(a, r)
    };
    if v < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Componentwise `sig^r(x)` with the default dead zone.
pub fn sig_pow(x: &[f64], r: f64) -> Vec<f64> {
    sig_pow_with(x, r, DEFAULT_DEAD_ZONE)
}

pub fn sig_pow_with(x: &[f64], r: f64, dead_zone: f64) -> Vec<f64> {
    x.iter().map(|&v| signed_pow(v, r, dead_zone)).collect()
}

/// Scalar activation of the neural dynamics. All are 1-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// `(|v+1| - |v-1|) / 2`
    Saturation,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            // (|v+1| - |v-1|) / 2, written as a clamp to stay exact
            Activation::Saturation => v.clamp(-1.0, 1.0),
            Activation::Tanh => libm::tanh(v),
            Activation::Identity => v,
        }
    }

    pub fn lipschitz(self) -> f64 {
        1.0
    }
}

/// `ẋ = W1 x + W2 Φ(x) + J`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralDynamics {
    pub w1: Matrix,
    pub w2: Matrix,
    pub activation: Activation,
    pub bias: Vec<f64>,
}

impl NeuralDynamics {
    pub fn new(w1: Matrix, w2: Matrix, activation: Activation, bias: Vec<f64>) -> Result<Self> {
        let n = w1.rows();
        if !w1.is_square() || !w2.is_square() || w2.rows() != n || bias.len() != n {
            bail!(
                Dimension,
                "neural dynamics needs square W1, W2 and bias of one size (got {}x{}, {}x{}, {})",
                w1.rows(),
                w1.cols(),
                w2.rows(),
                w2.cols(),
                bias.len()
            );
        }
        Ok(NeuralDynamics {
            w1,
            w2,
            activation,
            bias,
        })
    }

    pub fn dim(&self) -> usize {
        self.bias.len()
    }

    /// Lipschitz matrix of `Φ`: `‖Φ(x) - Φ(y)‖ <= ‖W3 (x - y)‖`.
    pub fn w3(&self) -> Matrix {
        Matrix::identity(self.dim()).scale(self.activation.lipschitz())
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = self.bias[i];
            let r1 = self.w1.row(i);
            let r2 = self.w2.row(i);
            for j in 0..n {
                acc += r1[j] * x[j] + r2[j] * self.activation.apply(x[j]);
            }
            out[i] = acc;
        }
    }
}

/// User-supplied vector field `f(x, out)`.
#[derive(Clone)]
pub struct CustomDynamics {
    dim: usize,
    f: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
}

impl CustomDynamics {
    pub fn new(dim: usize, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        CustomDynamics { dim, f: Arc::new(f) }
    }
}

impl fmt::Debug for CustomDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDynamics").field("dim", &self.dim).finish_non_exhaustive()
    }
}

/// Intrinsic behaviour `f` of an isolated node.
#[derive(Debug, Clone)]
pub enum IntrinsicDynamics {
    /// `f ≡ 0`: the consensus problem.
    Zero { dim: usize },
    Neural(NeuralDynamics),
    Custom(CustomDynamics),
}

impl IntrinsicDynamics {
    pub fn dim(&self) -> usize {
        match self {
            IntrinsicDynamics::Zero { dim } => *dim,
            IntrinsicDynamics::Neural(nn) => nn.dim(),
            IntrinsicDynamics::Custom(c) => c.dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, IntrinsicDynamics::Zero { .. })
    }

    #[inline]
    pub(crate) fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            IntrinsicDynamics::Zero { .. } => out.iter_mut().for_each(|o| *o = 0.0),
            IntrinsicDynamics::Neural(nn) => nn.eval_into(x, out),
            IntrinsicDynamics::Custom(c) => (c.f)(x, out),
        }
    }
}

/// `f(x)` for the given dynamics.
pub fn intrinsic_f(dynamics: &IntrinsicDynamics, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != dynamics.dim() {
        bail!(Dimension, "state of length {} for dynamics of dimension {}", x.len(), dynamics.dim());
    }
    let mut out = vec![0.0; x.len()];
    dynamics.eval_into(x, &mut out);
    Ok(out)
}

/// One full problem instance.
///
/// The controlled node of every cluster is its first node.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub partition: ClusterPartition,
    pub a: CouplingMatrix,
    pub b: CouplingMatrix,
    pub alpha: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub p: f64,
    pub q: f64,
    pub dynamics: IntrinsicDynamics,
    /// Initial state of each cluster's target trajectory.
    pub target_initials: Vec<Vec<f64>>,
    pub dead_zone: f64,
}

impl NetworkSpec {
    pub fn num_nodes(&self) -> usize {
        self.partition.num_nodes()
    }

    pub fn num_clusters(&self) -> usize {
        self.partition.num_clusters()
    }

    pub fn dim(&self) -> usize {
        self.dynamics.dim()
    }

    /// Every violated requirement, in a stable order.
    pub fn check(&self, tol: f64) -> Vec<Error> {
        let mut issues = Vec::new();
        for (name, mat) in [("A", &self.a), ("B", &self.b)] {
            match diagnose_a4(mat, &self.partition, tol) {
                Ok(d) if !d.passed() => {
                    let mut msg = alloc::format!("{name} is not in class A4:");
                    if !d.symmetric {
                        msg.push_str(" not symmetric;");
                    }
                    for b in d.failures() {
                        msg.push_str(&alloc::format!(
                            " block ({},{}) fails {:?};",
                            b.row_cluster + 1,
                            b.col_cluster + 1,
                            b.requirement
                        ));
                    }
                    issues.push(Error::Structure(msg));
                }
                Ok(_) => {}
                Err(e) => issues.push(e),
            }
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(Error::Domain(alloc::format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            issues.push(Error::Domain(alloc::format!("p must lie in (0,1), got {}", self.p)));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            issues.push(Error::Domain(alloc::format!("q must be greater than 1, got {}", self.q)));
        }
        if !(self.dead_zone >= 0.0) {
            issues.push(Error::Domain(String::from("dead zone must be nonnegative")));
        }
        let n = self.dim();
        if self.target_initials.len() != self.num_clusters() {
            issues.push(Error::Dimension(alloc::format!(
                "{} target states for {} clusters",
                self.target_initials.len(),
                self.num_clusters()
            )));
        }
        if let Some(k) = self.target_initials.iter().position(|s| s.len() != n) {
            issues.push(Error::Dimension(alloc::format!(
                "target {} has dimension {}, expected {n}",
                k + 1,
                self.target_initials[k].len()
            )));
        }
        for k1 in 0..self.target_initials.len() {
            for k2 in (k1 + 1)..self.target_initials.len() {
                if self.target_initials[k1] == self.target_initials[k2] {
                    issues.push(Error::Domain(alloc::format!(
                        "targets {} and {} start at the same state",
                        k1 + 1,
                        k2 + 1
                    )));
                }
            }
        }
        issues
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        match self.check(tol).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Node and target states at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub nodes: Vec<f64>,
    pub targets: Vec<f64>,
    pub time: f64,
    dim: usize,
}

impl SystemState {
    pub fn new(nodes: Vec<f64>, targets: Vec<f64>, dim: usize, time: f64) -> Result<Self> {
        if dim == 0 || nodes.len() % dim != 0 || targets.len() % dim != 0 {
            bail!(
                Dimension,
                "state buffers of length {} and {} are not multiples of {dim}",
                nodes.len(),
                targets.len()
            );
        }
        Ok(SystemState {
            nodes,
            targets,
            time,
            dim,
        })
    }

    pub fn from_vectors(nodes: &[Vec<f64>], targets: &[Vec<f64>], time: f64) -> Result<Self> {
        let dim = nodes
            .first()
            .or(targets.first())
            .map(|v| v.len())
            .unwrap_or(0);
        if nodes.iter().chain(targets).any(|v| v.len() != dim) {
            bail!(Dimension, "node and target vectors must all have dimension {dim}");
        }
        Self::new(nodes.concat(), targets.concat(), dim, time)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len() / self.dim
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, k: usize) -> &[f64] {
        &self.targets[k * self.dim..(k + 1) * self.dim]
    }

    fn check_against(&self, spec: &NetworkSpec) -> Result<()> {
        if self.dim != spec.dim()
            || self.num_nodes() != spec.num_nodes()
            || self.num_targets() != spec.num_clusters()
        {
            bail!(
                Dimension,
                "state has {} nodes, {} targets of dimension {}; spec expects {}, {}, {}",
                self.num_nodes(),
                self.num_targets(),
                self.dim,
                spec.num_nodes(),
                spec.num_clusters(),
                spec.dim()
            );
        }
        Ok(())
    }
}

/// Time derivative of a [`SystemState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub nodes: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Which coupled system drives the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Pinned cluster synchronization; with `f ≡ 0` this is cluster consensus.
    Cluster,
    /// Single cluster, pinned at node 0.
    Complete,
    /// One slave node tracking one master.
    MasterSlave,
    /// Drive a neural network to the equilibrium held in the target slot.
    /// The target does not move.
    NnStabilization,
}

impl Protocol {
    /// Rejects spec shapes the protocol cannot run on.
    pub fn check_spec(self, spec: &NetworkSpec) -> Result<()> {
        match self {
            Protocol::Cluster => Ok(()),
            Protocol::Complete => {
                if spec.num_clusters() != 1 {
                    bail!(Regime, "complete synchronization needs one cluster, got {}", spec.num_clusters());
                }
                Ok(())
            }
            Protocol::MasterSlave | Protocol::NnStabilization => {
                if spec.num_nodes() != 1 || spec.num_clusters() != 1 {
                    bail!(
                        Regime,
                        "{self:?} needs exactly one node and one target, got {} nodes",
                        spec.num_nodes()
                    );
                }
                if self == Protocol::NnStabilization
                    && !matches!(spec.dynamics, IntrinsicDynamics::Neural(_))
                {
                    bail!(Regime, "stabilization needs neural dynamics");
                }
                Ok(())
            }
        }
    }

    /// `dy = rhs(y)` where `y = [nodes, targets]`. The spec shape must have
    /// passed [`Protocol::check_spec`].
    pub(crate) fn rhs_into(self, spec: &NetworkSpec, y: &[f64], dy: &mut [f64]) {
        let split = spec.num_nodes() * spec.dim();
        let (x, s) = y.split_at(split);
        let (dx, ds) = dy.split_at_mut(split);
        match self {
            Protocol::Cluster => cluster_into(spec, x, s, dx, ds),
            Protocol::Complete => complete_into(spec, x, s, dx, ds),
            Protocol::MasterSlave => {
                master_slave_into(spec, x, s, dx, ds);
            }
            Protocol::NnStabilization => {
                master_slave_into(spec, x, s, dx, ds);
                ds.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
}

fn cluster_into(spec: &NetworkSpec, x: &[f64], s: &[f64], dx: &mut [f64], ds: &mut [f64]) {
    let n = spec.dim();
    let part = &spec.partition;
    let m = part.num_clusters();
    let (a, b) = (&spec.a, &spec.b);
    let (p, q, dz) = (spec.p, spec.q, spec.dead_zone);
    for k in 0..m {
        let ck = part.range(k);
        let sk = &s[k * n..(k + 1) * n];
        spec.dynamics.eval_into(sk, &mut ds[k * n..(k + 1) * n]);
        for i in ck.clone() {
            let xi = &x[i * n..(i + 1) * n];
            let out = &mut dx[i * n..(i + 1) * n];
            spec.dynamics.eval_into(xi, out);
            for l in 0..n {
                let mut acc = 0.0;
                for j in ck.clone() {
                    if j == i {
                        continue;
                    }
                    let d = x[j * n + l] - xi[l];
                    acc += spec.alpha * a[(i, j)] * signed_pow(d, p, dz)
                        + spec.beta * b[(i, j)] * signed_pow(d, q, dz);
                }
                for kp in 0..m {
                    if kp == k {
                        continue;
                    }
                    let (mut sa, mut sb) = (0.0, 0.0);
                    for j in part.range(kp) {
                        let d = x[j * n + l] - xi[l];
                        sa += a[(i, j)] * d;
                        sb += b[(i, j)] * d;
                    }
                    acc += signed_pow(sa, p, dz) + signed_pow(sb, q, dz);
                }
                if i == ck.start {
                    let e = xi[l] - sk[l];
                    acc -= spec.eps1 * signed_pow(e, p, dz) + spec.eps2 * signed_pow(e, q, dz);
                }
                out[l] += acc;
            }
        }
    }
}

fn complete_into(spec: &NetworkSpec, x: &[f64], s: &[f64], dx: &mut [f64], ds: &mut [f64]) {
    let n = spec.dim();
    let nodes = spec.num_nodes();
    let (a, b) = (&spec.a, &spec.b);
    let (p, q, dz) = (spec.p, spec.q, spec.dead_zone);
    spec.dynamics.eval_into(&s[..n], &mut ds[..n]);
    for i in 0..nodes {
        let xi = &x[i * n..(i + 1) * n];
        let out = &mut dx[i * n..(i + 1) * n];
        spec.dynamics.eval_into(xi, out);
        for l in 0..n {
            let mut acc = 0.0;
            for j in 0..nodes {
                if j == i {
                    continue;
                }
                let d = x[j * n + l] - xi[l];
                acc += spec.alpha * a[(i, j)] * signed_pow(d, p, dz)
                    + spec.beta * b[(i, j)] * signed_pow(d, q, dz);
            }
            if i == 0 {
                let e = xi[l] - s[l];
                acc -= spec.eps1 * signed_pow(e, p, dz) + spec.eps2 * signed_pow(e, q, dz);
            }
            out[l] += acc;
        }
    }
}

fn master_slave_into(spec: &NetworkSpec, x: &[f64], s: &[f64], dx: &mut [f64], ds: &mut [f64]) {
    pinned_tracking_into(
        &spec.dynamics,
        spec.eps1,
        spec.eps2,
        spec.p,
        spec.q,
        spec.dead_zone,
        x,
        s,
        dx,
    );
    spec.dynamics.eval_into(s, ds);
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn pinned_tracking_into(
    dynamics: &IntrinsicDynamics,
    eps1: f64,
    eps2: f64,
    p: f64,
    q: f64,
    dead_zone: f64,
    x: &[f64],
    s: &[f64],
    out: &mut [f64],
) {
    dynamics.eval_into(x, out);
    for l in 0..x.len() {
        let e = x[l] - s[l];
        out[l] -= eps1 * signed_pow(e, p, dead_zone) + eps2 * signed_pow(e, q, dead_zone);
    }
}

fn evaluate(spec: &NetworkSpec, protocol: Protocol, state: &SystemState) -> Result<Derivative> {
    state.check_against(spec)?;
    protocol.check_spec(spec)?;
    let y: Vec<f64> = state.nodes.iter().chain(&state.targets).copied().collect();
    let mut dy = vec![0.0; y.len()];
    protocol.rhs_into(spec, &y, &mut dy);
    let targets = dy.split_off(state.nodes.len());
    Ok(Derivative { nodes: dy, targets })
}

/// Pinned cluster protocol: the first node of each cluster is pulled toward
/// its target, all nodes couple within their cluster through `sig^p` and
/// `sig^q` of pairwise differences, and across clusters through `sig` of the
/// aggregated difference per foreign cluster. Targets follow `ṡ_k = f(s_k)`.
pub fn cluster_rhs(spec: &NetworkSpec, state: &SystemState) -> Result<Derivative> {
    evaluate(spec, Protocol::Cluster, state)
}

/// Complete synchronization with one pinned node. Errors unless `m = 1`.
pub fn complete_rhs(spec: &NetworkSpec, state: &SystemState) -> Result<Derivative> {
    evaluate(spec, Protocol::Complete, state)
}

/// `ẋ = f(x) - ε₁ sig^p(x-s) - ε₂ sig^q(x-s)`, `ṡ = f(s)`.
pub fn master_slave_rhs(
    eps1: f64,
    eps2: f64,
    p: f64,
    q: f64,
    dynamics: &IntrinsicDynamics,
    x: &[f64],
    s: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = dynamics.dim();
    if x.len() != n || s.len() != n {
        bail!(Dimension, "master-slave states must have dimension {n}");
    }
    let mut dx = vec![0.0; n];
    let mut ds = vec![0.0; n];
    pinned_tracking_into(dynamics, eps1, eps2, p, q, DEFAULT_DEAD_ZONE, x, s, &mut dx);
    dynamics.eval_into(s, &mut ds);
    Ok((dx, ds))
}

/// Stabilizing control of a neural network toward `x_star`.
#[derive(Debug, Clone, PartialEq)]
pub struct NnDerivative {
    pub derivative: Vec<f64>,
    /// `‖W1 x* + W2 Φ(x*) + J‖`.
    pub equilibrium_residual: f64,
    /// Set when the residual exceeds the tolerance: `x_star` is not an
    /// equilibrium and the control will not settle on it.
    pub residual_warning: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn nn_stabilization_rhs(
    dynamics: &NeuralDynamics,
    eps1: f64,
    eps2: f64,
    p: f64,
    q: f64,
    x_star: &[f64],
    x: &[f64],
    residual_tol: f64,
) -> Result<NnDerivative> {
    let n = dynamics.dim();
    if x.len() != n || x_star.len() != n {
        bail!(Dimension, "stabilization states must have dimension {n}");
    }
    let mut at_star = vec![0.0; n];
    dynamics.eval_into(x_star, &mut at_star);
    let residual = sqrt(at_star.iter().map(|v| v * v).sum());
    let mut derivative = vec![0.0; n];
    let f = IntrinsicDynamics::Neural(dynamics.clone());
    pinned_tracking_into(&f, eps1, eps2, p, q, DEFAULT_DEAD_ZONE, x, x_star, &mut derivative);
    Ok(NnDerivative {
        derivative,
        equilibrium_residual: residual,
        residual_warning: residual > residual_tol,
    })
}
