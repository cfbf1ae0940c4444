//! Fixed-step integration of the coupled protocols and the measurements taken
//! along the way.
//!
//! The right-hand sides are non-Lipschitz on the synchronization manifold, so
//! only explicit fixed-step schemes are offered; accuracy is checked by step
//! halving ([`step_halving_check`]) rather than by an embedded error model.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{bounds_for, BoundsReport};
use crate::dynamics::{NetworkSpec, Protocol, SystemState};
use crate::error::{bail, Error, Result};
use crate::math::{abs, powf, sqrt};
use crate::matrices::ClusterPartition;

/// Seed for the default initial node states.
pub const DEFAULT_SEED: u64 = 2016;
/// Default settling threshold on the error index `E(t)`.
pub const DEFAULT_SETTLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExplicitEuler,
    ClassicalRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step: f64,
    pub t_end: f64,
    /// Record every `record_stride`-th step (the initial state is always kept).
    pub record_stride: usize,
    /// Threshold on `E(t)` for [`Trajectory::settling_time`].
    pub settle_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::ClassicalRk4,
            step: 1e-4,
            t_end: 2.0,
            record_stride: 1,
            settle_tol: DEFAULT_SETTLE_TOL,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            bail!(Domain, "step must be positive, got {}", self.step);
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            bail!(Domain, "t_end must be positive, got {}", self.t_end);
        }
        if self.step > self.t_end {
            bail!(Domain, "step {} exceeds t_end {}", self.step, self.t_end);
        }
        if self.record_stride == 0 {
            bail!(Domain, "record_stride must be at least 1");
        }
        if !(self.settle_tol > 0.0) {
            bail!(Domain, "settle_tol must be positive");
        }
        Ok(())
    }

    /// Number of integration steps, `floor(t_end / step)`.
    pub fn num_steps(&self) -> usize {
        // the nudge keeps 2.0 / 1e-4 from landing on 19999.999…
        libm::floor(self.t_end / self.step * (1.0 + 1e-12)) as usize
    }

    /// Recorded sample count, `floor(t_end / (step * stride)) + 1`.
    pub fn sample_count(&self) -> usize {
        self.num_steps() / self.record_stride + 1
    }
}

/// Sampled solution with the derived error series.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Flat node states per sample (`N * n` values each).
    pub node_states: Vec<Vec<f64>>,
    /// Flat target states per sample (`m * n` values each).
    pub target_states: Vec<Vec<f64>>,
    /// `E(t)`: root of the summed squared node-to-target distances.
    pub error_index: Vec<f64>,
    /// `V(t) = E(t)² / 2`.
    pub lyapunov: Vec<f64>,
    pub settling_time: Option<f64>,
    pub dim: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_error(&self) -> f64 {
        self.error_index.last().copied().unwrap_or(0.0)
    }

    /// State at sample `idx`.
    pub fn state(&self, idx: usize) -> SystemState {
        SystemState::new(
            self.node_states[idx].clone(),
            self.target_states[idx].clone(),
            self.dim,
            self.times[idx],
        )
        .expect("recorded states have consistent shapes")
    }

    /// First time `E` drops below `level` (not necessarily for good).
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.error_index)
            .find(|(_, e)| **e < level)
            .map(|(t, _)| *t)
    }
}

fn squared_error(nodes: &[f64], targets: &[f64], partition: &ClusterPartition, n: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..partition.num_clusters() {
        let s = &targets[k * n..(k + 1) * n];
        for i in partition.range(k) {
            for l in 0..n {
                let d = nodes[i * n + l] - s[l];
                acc += d * d;
            }
        }
    }
    acc
}

/// `E = sqrt(Σ_i ‖x_i - s_{k(i)}‖²)`.
pub fn error_index(state: &SystemState, partition: &ClusterPartition) -> Result<f64> {
    if state.num_nodes() != partition.num_nodes() || state.num_targets() != partition.num_clusters() {
        bail!(
            Dimension,
            "state with {} nodes and {} targets for a partition of {} nodes in {} clusters",
            state.num_nodes(),
            state.num_targets(),
            partition.num_nodes(),
            partition.num_clusters()
        );
    }
    Ok(sqrt(squared_error(&state.nodes, &state.targets, partition, state.dim())))
}

/// First sample time after which every recorded value stays below `tol`.
pub fn detect_settling(times: &[f64], series: &[f64], tol: f64) -> Option<f64> {
    debug_assert_eq!(times.len(), series.len());
    match series.iter().rposition(|e| !(*e < tol)) {
        None => times.first().copied(),
        Some(last) => times.get(last + 1).copied(),
    }
}

struct Stepper {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stepper {
    fn new(len: usize) -> Self {
        Stepper {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    fn advance(&mut self, method: Method, h: f64, y: &mut [f64], mut f: impl FnMut(&[f64], &mut [f64])) {
        match method {
            Method::ExplicitEuler => {
                f(y, &mut self.k1);
                for (yi, ki) in y.iter_mut().zip(&self.k1) {
                    *yi += h * ki;
                }
            }
            Method::ClassicalRk4 => {
                let half = 0.5 * h;
                f(y, &mut self.k1);
                for i in 0..y.len() {
                    self.tmp[i] = y[i] + half * self.k1[i];
                }
                f(&self.tmp, &mut self.k2);
                for i in 0..y.len() {
                    self.tmp[i] = y[i] + half * self.k2[i];
                }
                f(&self.tmp, &mut self.k3);
                for i in 0..y.len() {
                    self.tmp[i] = y[i] + h * self.k3[i];
                }
                f(&self.tmp, &mut self.k4);
                let sixth = h / 6.0;
                for i in 0..y.len() {
                    y[i] += sixth * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
                }
            }
        }
    }
}

/// Integrates `protocol` on `spec` from `initial` (whose time is the start
/// time). Deterministic for identical inputs.
pub fn integrate(
    spec: &NetworkSpec,
    protocol: Protocol,
    initial: &SystemState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    protocol.check_spec(spec)?;
    let n = spec.dim();
    if initial.dim() != n
        || initial.num_nodes() != spec.num_nodes()
        || initial.num_targets() != spec.num_clusters()
    {
        bail!(
            Dimension,
            "initial state has {} nodes and {} targets of dimension {}",
            initial.num_nodes(),
            initial.num_targets(),
            initial.dim()
        );
    }

    let split = initial.nodes.len();
    let mut y: Vec<f64> = initial.nodes.iter().chain(&initial.targets).copied().collect();
    let mut stepper = Stepper::new(y.len());
    let steps = cfg.num_steps();
    let samples = cfg.sample_count();
    let t0 = initial.time;

    let mut traj = Trajectory {
        times: Vec::with_capacity(samples),
        node_states: Vec::with_capacity(samples),
        target_states: Vec::with_capacity(samples),
        error_index: Vec::with_capacity(samples),
        lyapunov: Vec::with_capacity(samples),
        settling_time: None,
        dim: n,
    };
    let record = |traj: &mut Trajectory, t: f64, y: &[f64]| {
        let (x, s) = y.split_at(split);
        let sq = squared_error(x, s, &spec.partition, n);
        traj.times.push(t);
        traj.node_states.push(x.to_vec());
        traj.target_states.push(s.to_vec());
        traj.error_index.push(sqrt(sq));
        traj.lyapunov.push(0.5 * sq);
    };
    record(&mut traj, t0, &y);

    for step in 1..=steps {
        stepper.advance(cfg.method, cfg.step, &mut y, |yy, dy| protocol.rhs_into(spec, yy, dy));
        let t = t0 + step as f64 * cfg.step;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        if step % cfg.record_stride == 0 {
            record(&mut traj, t, &y);
        }
    }
    traj.settling_time = detect_settling(&traj.times, &traj.error_index, cfg.settle_tol);
    Ok(traj)
}

/// Nodes drawn uniformly from `[-half_width, half_width]^n` with a seeded
/// ChaCha8 stream (node-major order); targets at the spec's initial states.
pub fn random_initial_state(spec: &NetworkSpec, seed: u64, half_width: f64) -> SystemState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = spec.num_nodes() * spec.dim();
    let nodes: Vec<f64> = (0..len)
        .map(|_| rng.gen_range(-half_width..=half_width))
        .collect();
    SystemState::new(nodes, spec.target_initials.concat(), spec.dim(), 0.0)
        .expect("spec dimensions are consistent")
}

/// Every node placed on its cluster's target: zero error.
pub fn synchronized_state(spec: &NetworkSpec) -> SystemState {
    let mut nodes = Vec::with_capacity(spec.num_nodes() * spec.dim());
    for k in 0..spec.num_clusters() {
        for _ in spec.partition.range(k) {
            nodes.extend_from_slice(&spec.target_initials[k]);
        }
    }
    SystemState::new(nodes, spec.target_initials.concat(), spec.dim(), 0.0)
        .expect("spec dimensions are consistent")
}

/// Outcome of checking `V̇ <= bound(V)` along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovCheck {
    /// Interior samples examined.
    pub checked: usize,
    pub violations: usize,
    /// Largest `V̇ - bound` beyond slack (0 when there are no violations).
    pub worst_excess: f64,
    pub worst_time: Option<f64>,
    /// False when the report is infeasible: the bound is then not a theorem
    /// and the counts are informational only.
    pub guaranteed: bool,
}

/// Compares centered finite differences of `V` against
/// `-(ᾱ-γ₁-2δ) V^{(1+p)/2}` (V < 1) or `-(β̄-γ₂-2δ) V^{(1+q)/2}` (V ≥ 1), with
/// slack `max(1e-6, 0.05 |bound|)`. The first and last samples are skipped.
pub fn lyapunov_inequality_check(traj: &Trajectory, report: &BoundsReport) -> LyapunovCheck {
    let v = &traj.lyapunov;
    let t = &traj.times;
    let mut out = LyapunovCheck {
        checked: 0,
        violations: 0,
        worst_excess: 0.0,
        worst_time: None,
        guaranteed: report.feasible(),
    };
    if v.len() < 3 {
        return out;
    }
    let (am, bm) = (report.alpha_margin(), report.beta_margin());
    for i in 1..v.len() - 1 {
        let rate = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
        let bound = if v[i] < 1.0 {
            -am * powf(v[i], 0.5 * (1.0 + report.p))
        } else {
            -bm * powf(v[i], 0.5 * (1.0 + report.q))
        };
        let slack = f64::max(1e-6, 0.05 * abs(bound));
        out.checked += 1;
        let excess = rate - bound - slack;
        if excess > 0.0 {
            out.violations += 1;
            if excess > out.worst_excess {
                out.worst_excess = excess;
                out.worst_time = Some(t[i]);
            }
        }
    }
    out
}

/// Settling times measured at step `h` and `h/2` over the same horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepHalving {
    pub step: f64,
    pub settling_coarse: Option<f64>,
    pub settling_fine: Option<f64>,
    /// `|E_fine(t_end) - E_coarse(t_end)| / E_coarse(t_end)` (absolute when
    /// the coarse value is zero).
    pub final_error_change: f64,
}

impl StepHalving {
    /// Settling moved by at most one coarse step.
    pub fn settling_converged(&self) -> bool {
        match (self.settling_coarse, self.settling_fine) {
            (Some(a), Some(b)) => abs(a - b) <= self.step * (1.0 + 1e-9),
            (None, None) => true,
            _ => false,
        }
    }
}

pub fn step_halving_check(
    spec: &NetworkSpec,
    protocol: Protocol,
    initial: &SystemState,
    cfg: &IntegratorConfig,
) -> Result<StepHalving> {
    let coarse = integrate(spec, protocol, initial, cfg)?;
    let fine_cfg = IntegratorConfig {
        step: cfg.step / 2.0,
        record_stride: cfg.record_stride * 2,
        ..*cfg
    };
    let fine = integrate(spec, protocol, initial, &fine_cfg)?;
    // resolve settling on the fine run's own grid
    let fine_settle = {
        let mut c = fine_cfg;
        c.record_stride = 1;
        integrate(spec, protocol, initial, &c)?.settling_time
    };
    let (ec, ef) = (coarse.final_error(), fine.final_error());
    let change = if ec == 0.0 { abs(ef) } else { abs(ef - ec) / ec };
    let coarse_settle = if cfg.record_stride == 1 {
        coarse.settling_time
    } else {
        let mut c = *cfg;
        c.record_stride = 1;
        integrate(spec, protocol, initial, &c)?.settling_time
    };
    Ok(StepHalving {
        step: cfg.step,
        settling_coarse: coarse_settle,
        settling_fine: fine_settle,
        final_error_change: change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Coupling gain `α`; `ε₁` moves with it at a fixed ratio.
    Alpha,
    /// Coupling gain `β`; `ε₂` moves with it at a fixed ratio.
    Beta,
    P,
    Q,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Beta => "beta",
            SweepParameter::P => "p",
            SweepParameter::Q => "q",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &NetworkSpec, value: f64) -> NetworkSpec {
        let mut spec = base.clone();
        match self {
            SweepParameter::Alpha => {
                spec.eps1 = base.eps1 / base.alpha * value;
                spec.alpha = value;
            }
            SweepParameter::Beta => {
                spec.eps2 = base.eps2 / base.beta * value;
                spec.beta = value;
            }
            SweepParameter::P => spec.p = value,
            SweepParameter::Q => spec.q = value,
        }
        spec
    }
}

impl core::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParameter::Alpha),
            "beta" => Ok(SweepParameter::Beta),
            "p" => Ok(SweepParameter::P),
            "q" => Ok(SweepParameter::Q),
            other => Err(Error::Domain(alloc::format!(
                "unknown sweep parameter {other:?} (expected alpha, beta, p or q)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub settling: Option<f64>,
    pub t_max: Option<f64>,
    pub feasible: bool,
    /// Set when the run could not be completed (invalid value, divergence).
    pub failure: Option<String>,
}

/// One integration per value, all from the same `initial` state.
pub fn sweep(
    base: &NetworkSpec,
    protocol: Protocol,
    param: SweepParameter,
    values: &[f64],
    initial: &SystemState,
    cfg: &IntegratorConfig,
    delta: f64,
) -> Vec<SweepRow> {
    values
        .iter()
        .map(|&value| sweep_row(base, protocol, param, value, initial, cfg, delta))
        .collect()
}

/// A single row of [`sweep`]; rows are independent of each other.
pub fn sweep_row(
    base: &NetworkSpec,
    protocol: Protocol,
    param: SweepParameter,
    value: f64,
    initial: &SystemState,
    cfg: &IntegratorConfig,
    delta: f64,
) -> SweepRow {
    let spec = param.apply(base, value);
    let mut row = SweepRow {
        value,
        settling: None,
        t_max: None,
        feasible: false,
        failure: None,
    };
    if let Err(e) = spec.validate(crate::matrices::DEFAULT_TOL) {
        row.failure = Some(e.to_string());
        return row;
    }
    if let Ok(report) = bounds_for(&spec, protocol, delta) {
        row.feasible = report.feasible();
        row.t_max = report.t_max;
    }
    match integrate(&spec, protocol, initial, cfg) {
        Ok(traj) => row.settling = traj.settling_time,
        Err(e) => row.failure = Some(e.to_string()),
    }
    row
}
