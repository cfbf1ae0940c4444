//! Settling-time guarantees.
//!
//! Each cluster's diagonal coupling block is power-transformed, pinned at its
//! first node and reduced to a smallest eigenvalue. Those eigenvalues, the
//! inter-cluster coupling magnitudes and the QUAD constant `δ` of the node
//! dynamics give two decay rates,
//!
//! ```text
//! ᾱ - γ₁ - 2δ   (applies while V < 1, exponent (1+p)/2)
//! β̄ - γ₂ - 2δ   (applies while V ≥ 1, exponent (1+q)/2)
//! ```
//!
//! and, when both are positive, the bound
//! `T_max = 2/((ᾱ-γ₁-2δ)(1-p)) + 2/((β̄-γ₂-2δ)(q-1))`.

use alloc::vec::Vec;

use crate::dynamics::{IntrinsicDynamics, NetworkSpec, Protocol};
use crate::error::{bail, Result};
use crate::linalg::{spectral_norm, symmetric_eigenvalues, Matrix};
use crate::math::{exp, ln, powf};
use crate::matrices::{diagnose_a4, is_class_a2, max_inter_cluster_magnitude, DEFAULT_TOL};

/// Symmetry tolerance accepted by [`min_eigenvalue_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-9;

/// `Ā`: off-diagonals raised to `exponent`, diagonal set to minus the
/// transformed row sum.
pub fn power_transform(block: &Matrix, exponent: f64) -> Result<Matrix> {
    if !block.is_square() {
        bail!(Dimension, "power transform of a {}x{} block", block.rows(), block.cols());
    }
    if !(exponent > 0.0) {
        bail!(Domain, "power transform exponent must be positive, got {exponent}");
    }
    let n = block.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = block[(i, j)];
            if v < -DEFAULT_TOL {
                bail!(Domain, "off-diagonal entry ({i},{j}) = {v} is negative");
            }
            let t = if v <= 0.0 { 0.0 } else { powf(v, exponent) };
            out[(i, j)] = t;
            row_sum += t;
        }
        out[(i, i)] = -row_sum;
    }
    Ok(out)
}

/// `-2 Ā + diag{(2 pin_gain / gain)^{2/(1+exponent_param)}, 0, …, 0}`.
pub fn pinned_matrix(bar_block: &Matrix, gain: f64, pin_gain: f64, exponent_param: f64) -> Result<Matrix> {
    if !(gain > 0.0) {
        bail!(Domain, "coupling gain must be positive, got {gain}");
    }
    if !(pin_gain > 0.0) {
        bail!(Domain, "pinning gain must be positive, got {pin_gain}");
    }
    if !bar_block.is_square() || bar_block.rows() == 0 {
        bail!(Dimension, "pinned matrix needs a non-empty square block");
    }
    let mut out = bar_block.scale(-2.0);
    out[(0, 0)] += powf(2.0 * pin_gain / gain, 2.0 / (1.0 + exponent_param));
    Ok(out)
}

/// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi).
pub fn min_eigenvalue_symmetric(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        bail!(Dimension, "eigenvalue of a {}x{} matrix", m.rows(), m.cols());
    }
    if !m.is_symmetric(SYMMETRY_TOL) {
        bail!(Domain, "matrix is not symmetric");
    }
    if m.rows() == 0 {
        bail!(Dimension, "empty matrix has no eigenvalues");
    }
    Ok(symmetric_eigenvalues(m)?[0])
}

fn max_eigenvalue_symmetric(m: &Matrix) -> Result<f64> {
    Ok(*symmetric_eigenvalues(m)?.last().unwrap_or(&0.0))
}

/// Estimates of the QUAD constant `δ` for `f(x) = W1 x + W2 Φ(x) + J` with
/// `‖Φ(x) - Φ(y)‖ <= ‖W3 (x - y)‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadDelta {
    /// `min_ε λ_max(½(W1 + W1ᵀ + ε W2 W2ᵀ + ε⁻¹ W3ᵀ W3))` over the grid.
    pub lmi: f64,
    /// The grid point attaining `lmi`.
    pub best_eps: f64,
    /// `λ_max((W1 + W1ᵀ)/2) + ‖W2‖ ‖W3‖`.
    pub coarse: f64,
}

impl QuadDelta {
    /// The smaller (tighter) of the two estimates.
    pub fn best(&self) -> f64 {
        self.lmi.min(self.coarse)
    }
}

/// `count` points spaced logarithmically over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (ln(lo), ln(hi));
    (0..count)
        .map(|i| exp(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Sixty-one points from `1e-3` to `1e3`.
pub fn default_eps_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 61)
}

pub fn quad_delta_estimate(w1: &Matrix, w2: &Matrix, w3: &Matrix, eps_grid: &[f64]) -> Result<QuadDelta> {
    let n = w1.rows();
    if !w1.is_square() || w2.rows() != n || w3.cols() != n || w2.cols() != w3.rows() {
        bail!(
            Dimension,
            "W1 {}x{}, W2 {}x{}, W3 {}x{} are not conformable",
            w1.rows(),
            w1.cols(),
            w2.rows(),
            w2.cols(),
            w3.rows(),
            w3.cols()
        );
    }
    if eps_grid.is_empty() {
        bail!(Domain, "epsilon grid is empty");
    }
    if let Some(e) = eps_grid.iter().find(|e| !(**e > 0.0)) {
        bail!(Domain, "epsilon grid entries must be positive, got {e}");
    }
    let sym = w1.symmetric_part()?;
    let ww = w2.matmul(&w2.transpose())?;
    let vv = w3.transpose().matmul(w3)?;
    let mut lmi = f64::INFINITY;
    let mut best_eps = eps_grid[0];
    for &eps in eps_grid {
        let m = sym.add(&ww.scale(0.5 * eps))?.add(&vv.scale(0.5 / eps))?;
        let top = max_eigenvalue_symmetric(&m)?;
        if top < lmi {
            lmi = top;
            best_eps = eps;
        }
    }
    let coarse = max_eigenvalue_symmetric(&sym)? + spectral_norm(w2)? * spectral_norm(w3)?;
    Ok(QuadDelta {
        lmi,
        best_eps,
        coarse,
    })
}

/// QUAD estimate for built-in dynamics; `f ≡ 0` gives zero.
pub fn estimate_delta(dynamics: &IntrinsicDynamics, eps_grid: &[f64]) -> Result<QuadDelta> {
    match dynamics {
        IntrinsicDynamics::Zero { .. } => Ok(QuadDelta {
            lmi: 0.0,
            best_eps: eps_grid.first().copied().unwrap_or(1.0),
            coarse: 0.0,
        }),
        IntrinsicDynamics::Neural(nn) => quad_delta_estimate(&nn.w1, &nn.w2, &nn.w3(), eps_grid),
        IntrinsicDynamics::Custom(_) => {
            bail!(Domain, "no QUAD estimate for custom dynamics; supply delta")
        }
    }
}

/// Which guarantee a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRegime {
    Cluster,
    /// Cluster protocol with `δ = 0` (`f ≡ 0`).
    ClusterConsensus,
    Complete,
    MasterSlave,
}

impl BoundRegime {
    pub fn name(self) -> &'static str {
        match self {
            BoundRegime::Cluster => "cluster",
            BoundRegime::ClusterConsensus => "cluster-consensus",
            BoundRegime::Complete => "complete",
            BoundRegime::MasterSlave => "master-slave",
        }
    }
}

/// Every derived constant behind a settling-time guarantee.
///
/// Quantities that do not exist in a regime are `None` (the master-slave
/// bound has no eigenvalues) or zero (`γ` terms without inter-cluster
/// coupling).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub regime: BoundRegime,
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub n_bar: Option<usize>,
    pub alpha_bar: f64,
    pub beta_bar: f64,
    pub a_bar: f64,
    pub b_bar: f64,
    pub r_bar: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    pub feasible_alpha: bool,
    pub feasible_beta: bool,
    pub t_max: Option<f64>,
    /// Smallest coupling gain `α` (pinning gain `ε₁` for master-slave) that
    /// makes the first condition hold, with the pin-to-coupling ratio fixed.
    pub alpha_threshold: f64,
    /// Same for `β` (`ε₂`).
    pub beta_threshold: f64,
}

fn settling(alpha_margin: f64, beta_margin: f64, p: f64, q: f64) -> f64 {
    2.0 / (alpha_margin * (1.0 - p)) + 2.0 / (beta_margin * (q - 1.0))
}

impl BoundsReport {
    /// `ᾱ - γ₁ - 2δ`.
    pub fn alpha_margin(&self) -> f64 {
        self.alpha_bar - self.gamma1 - 2.0 * self.delta
    }

    /// `β̄ - γ₂ - 2δ`.
    pub fn beta_margin(&self) -> f64 {
        self.beta_bar - self.gamma2 - 2.0 * self.delta
    }

    pub fn feasible(&self) -> bool {
        self.feasible_alpha && self.feasible_beta
    }

    /// The settling bound re-derived from the stored constants.
    pub fn settling_from_fields(&self) -> Option<f64> {
        if self.alpha_margin() > 0.0 && self.beta_margin() > 0.0 {
            Some(settling(self.alpha_margin(), self.beta_margin(), self.p, self.q))
        } else {
            None
        }
    }

    /// Upper bound on `V̇` at Lyapunov value `v`, or `None` if infeasible.
    pub fn lyapunov_rate_bound(&self, v: f64) -> Option<f64> {
        if !self.feasible() {
            return None;
        }
        Some(if v < 1.0 {
            -self.alpha_margin() * powf(v, 0.5 * (1.0 + self.p))
        } else {
            -self.beta_margin() * powf(v, 0.5 * (1.0 + self.q))
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        regime: BoundRegime,
        p: f64,
        q: f64,
        delta: f64,
        rho: Option<(f64, f64)>,
        n_bar: Option<usize>,
        (alpha_bar, beta_bar): (f64, f64),
        (a_bar, b_bar, r_bar): (f64, f64, usize),
        (gamma1, gamma2): (f64, f64),
        (alpha_scale, beta_scale): (f64, f64),
    ) -> Self {
        let mut report = BoundsReport {
            regime,
            p,
            q,
            delta,
            rho1: rho.map(|r| r.0),
            rho2: rho.map(|r| r.1),
            n_bar,
            alpha_bar,
            beta_bar,
            a_bar,
            b_bar,
            r_bar,
            gamma1,
            gamma2,
            feasible_alpha: false,
            feasible_beta: false,
            t_max: None,
            // ᾱ and β̄ are linear in the gain once the pin ratio is fixed
            alpha_threshold: (gamma1 + 2.0 * delta) / alpha_scale,
            beta_threshold: (gamma2 + 2.0 * delta) / beta_scale,
        };
        report.feasible_alpha = report.alpha_margin() > 0.0;
        report.feasible_beta = report.beta_margin() > 0.0;
        if report.feasible() {
            report.t_max = report.settling_from_fields();
        }
        report
    }
}

/// Power-transformed and pinned diagonal blocks of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnedBlock {
    pub a_bar: Matrix,
    pub b_bar: Matrix,
    pub a_hat: Matrix,
    pub b_hat: Matrix,
    pub lambda_min_a: f64,
    pub lambda_min_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnedBlockSet {
    pub blocks: Vec<PinnedBlock>,
}

impl PinnedBlockSet {
    /// `ρ₁ = min_k λ_min(Â_kk)`.
    pub fn rho1(&self) -> f64 {
        self.blocks.iter().map(|b| b.lambda_min_a).fold(f64::INFINITY, f64::min)
    }

    /// `ρ₂ = min_k λ_min(B̂_kk)`.
    pub fn rho2(&self) -> f64 {
        self.blocks.iter().map(|b| b.lambda_min_b).fold(f64::INFINITY, f64::min)
    }
}

/// Pinned blocks for every cluster of `spec`.
pub fn pinned_blocks(spec: &NetworkSpec) -> Result<PinnedBlockSet> {
    let part = &spec.partition;
    let mut blocks = Vec::with_capacity(part.num_clusters());
    for k in 0..part.num_clusters() {
        let r = part.range(k);
        let a_bar = power_transform(&spec.a.submatrix(r.clone(), r.clone()), 2.0 / (1.0 + spec.p))?;
        let b_bar = power_transform(&spec.b.submatrix(r.clone(), r), 2.0 / (1.0 + spec.q))?;
        let a_hat = pinned_matrix(&a_bar, spec.alpha, spec.eps1, spec.p)?;
        let b_hat = pinned_matrix(&b_bar, spec.beta, spec.eps2, spec.q)?;
        blocks.push(PinnedBlock {
            lambda_min_a: min_eigenvalue_symmetric(&a_hat)?,
            lambda_min_b: min_eigenvalue_symmetric(&b_hat)?,
            a_bar,
            b_bar,
            a_hat,
            b_hat,
        });
    }
    Ok(PinnedBlockSet { blocks })
}

fn check_exponents_and_delta(p: f64, q: f64, delta: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        bail!(Domain, "p must lie in (0,1), got {p}");
    }
    if !(q > 1.0 && q.is_finite()) {
        bail!(Domain, "q must be greater than 1, got {q}");
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        bail!(Domain, "delta must be nonnegative, got {delta}");
    }
    Ok(())
}

fn check_gains(spec: &NetworkSpec) -> Result<()> {
    for (name, v) in [
        ("alpha", spec.alpha),
        ("beta", spec.beta),
        ("eps1", spec.eps1),
        ("eps2", spec.eps2),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            bail!(Domain, "{name} must be positive, got {v}");
        }
    }
    Ok(())
}

fn alpha_bar_of(alpha: f64, p: f64, rho1: f64) -> f64 {
    alpha * powf(2.0, 0.5 * (p - 1.0)) * powf(rho1, 0.5 * (1.0 + p))
}

fn beta_bar_of(beta: f64, q: f64, n_bar: usize, rho2: f64) -> f64 {
    beta * powf(n_bar as f64, 0.5 * (1.0 - q)) * powf(2.0, 0.5 * (q - 1.0)) * powf(rho2, 0.5 * (1.0 + q))
}

/// Cluster synchronization bound. `delta = 0` gives the cluster-consensus
/// bound. Infeasible gains produce a report without `t_max`, not an error.
pub fn compute_bounds(spec: &NetworkSpec, delta: f64) -> Result<BoundsReport> {
    check_exponents_and_delta(spec.p, spec.q, delta)?;
    check_gains(spec)?;
    for (name, mat) in [("A", &spec.a), ("B", &spec.b)] {
        if !diagnose_a4(mat, &spec.partition, DEFAULT_TOL)?.passed() {
            bail!(Structure, "{name} is not in class A4 under the given partition");
        }
    }
    let (p, q) = (spec.p, spec.q);
    let part = &spec.partition;
    let n = spec.dim();
    let big_n = part.num_nodes();
    let m = part.num_clusters();

    let pinned = pinned_blocks(spec)?;
    let (rho1, rho2) = (pinned.rho1(), pinned.rho2());
    let pairs: usize = part.sizes().iter().map(|s| s * (s - 1) / 2).sum();
    let n_bar = n * (pairs + m);

    let alpha_bar = alpha_bar_of(spec.alpha, p, rho1);
    let beta_bar = beta_bar_of(spec.beta, q, n_bar, rho2);

    let a_bar = max_inter_cluster_magnitude(&spec.a, part);
    let b_bar = max_inter_cluster_magnitude(&spec.b, part);
    let r_bar = part.sizes().iter().map(|s| big_n - s).max().unwrap_or(0);
    let gamma1 = powf(a_bar, p) * r_bar as f64 * powf((big_n * n) as f64, 0.5 * (1.0 - p)) * powf(2.0, 0.5 * (1.0 + p));
    let gamma2 = powf(b_bar, q) * r_bar as f64 * powf(2.0, 0.5 * (1.0 + q));

    let regime = if delta == 0.0 {
        BoundRegime::ClusterConsensus
    } else {
        BoundRegime::Cluster
    };
    Ok(BoundsReport::assemble(
        regime,
        p,
        q,
        delta,
        Some((rho1, rho2)),
        Some(n_bar),
        (alpha_bar, beta_bar),
        (a_bar, b_bar, r_bar),
        (gamma1, gamma2),
        (alpha_bar / spec.alpha, beta_bar / spec.beta),
    ))
}

/// Complete synchronization bound for a single cluster pinned at node 0.
pub fn compute_bounds_complete(spec: &NetworkSpec, delta: f64) -> Result<BoundsReport> {
    if spec.num_clusters() != 1 {
        bail!(Regime, "complete synchronization needs one cluster, got {}", spec.num_clusters());
    }
    check_exponents_and_delta(spec.p, spec.q, delta)?;
    check_gains(spec)?;
    for (name, mat) in [("A", &spec.a), ("B", &spec.b)] {
        if !is_class_a2(mat, DEFAULT_TOL)? {
            bail!(Structure, "{name} is not in class A2");
        }
    }
    let (p, q) = (spec.p, spec.q);
    let big_n = spec.num_nodes();
    let a_hat = pinned_matrix(&power_transform(&spec.a, 2.0 / (1.0 + p))?, spec.alpha, spec.eps1, p)?;
    let b_hat = pinned_matrix(&power_transform(&spec.b, 2.0 / (1.0 + q))?, spec.beta, spec.eps2, q)?;
    let rho1 = min_eigenvalue_symmetric(&a_hat)?;
    let rho2 = min_eigenvalue_symmetric(&b_hat)?;
    let n_bar = spec.dim() * (big_n * (big_n - 1) / 2 + 1);
    let alpha_bar = alpha_bar_of(spec.alpha, p, rho1);
    let beta_bar = beta_bar_of(spec.beta, q, n_bar, rho2);
    Ok(BoundsReport::assemble(
        BoundRegime::Complete,
        p,
        q,
        delta,
        Some((rho1, rho2)),
        Some(n_bar),
        (alpha_bar, beta_bar),
        (0.0, 0.0, 0),
        (0.0, 0.0),
        (alpha_bar / spec.alpha, beta_bar / spec.beta),
    ))
}

/// Master-slave bound, `ᾱ = ε₁ 2^{(1+p)/2}`, `β̄ = ε₂ n^{(1-q)/2} 2^{(1+q)/2}`.
pub fn compute_bounds_master_slave(eps1: f64, eps2: f64, p: f64, q: f64, n: usize, delta: f64) -> Result<BoundsReport> {
    check_exponents_and_delta(p, q, delta)?;
    if !(eps1 > 0.0 && eps2 > 0.0) {
        bail!(Domain, "pinning gains must be positive, got {eps1} and {eps2}");
    }
    if n == 0 {
        bail!(Dimension, "state dimension must be at least 1");
    }
    let alpha_scale = powf(2.0, 0.5 * (1.0 + p));
    let beta_scale = powf(n as f64, 0.5 * (1.0 - q)) * powf(2.0, 0.5 * (1.0 + q));
    Ok(BoundsReport::assemble(
        BoundRegime::MasterSlave,
        p,
        q,
        delta,
        None,
        None,
        (eps1 * alpha_scale, eps2 * beta_scale),
        (0.0, 0.0, 0),
        (0.0, 0.0),
        (alpha_scale, beta_scale),
    ))
}

/// The bound that matches `protocol`.
pub fn bounds_for(spec: &NetworkSpec, protocol: Protocol, delta: f64) -> Result<BoundsReport> {
    match protocol {
        Protocol::Cluster => compute_bounds(spec, delta),
        Protocol::Complete => compute_bounds_complete(spec, delta),
        Protocol::MasterSlave | Protocol::NnStabilization => {
            protocol.check_spec(spec)?;
            compute_bounds_master_slave(spec.eps1, spec.eps2, spec.p, spec.q, spec.dim(), delta)
        }
    }
}
