//! Command implementations. Each returns the text for stdout plus the exit
//! status; files go through [`crate::output::write_atomic`].

use std::fmt::Write as _;
use std::path::PathBuf;

use clustersync::bounds::{bounds_for, default_eps_grid, estimate_delta, BoundsReport};
use clustersync::dynamics::{nn_stabilization_rhs, IntrinsicDynamics, NetworkSpec, SystemState};
use clustersync::linalg::spectral_norm;
use clustersync::matrices::{diagnose_a4, is_class_a1, is_class_a2, is_class_a3, DEFAULT_TOL};
use clustersync::presets::{self, published};
use clustersync::sim::{
    integrate, lyapunov_inequality_check, random_initial_state, sweep_row, IntegratorConfig,
    LyapunovCheck, SweepParameter, SweepRow, Trajectory,
};
use clustersync::Matrix;
use serde::Serialize;

use crate::config::{DeltaChoice, Format, LoadedConfig, ParamName, Regime, Resolved, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_opt, to_json, trajectory_csv, with_suffix, write_atomic};

/// Stationarity tolerance for the equilibrium of `nn-stabilization`.
const EQUILIBRIUM_TOL: f64 = 1e-8;
const DEFAULT_PREFIX: &str = "clustersync";

#[derive(Debug, Default)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    pub exit: i32,
}

impl CommandOutput {
    fn emit(&mut self, path: PathBuf, contents: &str) -> Result<(), CliError> {
        write_atomic(&path, contents.as_bytes())?;
        writeln!(self.stdout, "wrote {}", path.display()).unwrap();
        self.files.push(path);
        Ok(())
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<String>,
    pub formats: Vec<Format>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub param: Option<ParamName>,
    pub values: Option<Vec<f64>>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(o) = &self.output {
            cfg.output = Some(o.clone());
        }
        if !self.formats.is_empty() {
            cfg.formats = self.formats.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(h) = self.step {
            cfg.integrator.step = h;
        }
        if let Some(t) = self.t_end {
            cfg.integrator.t_end = t;
        }
        if self.param.is_some() || self.values.is_some() {
            let current = cfg.sweep.clone();
            cfg.sweep = Some(crate::config::SweepSettings {
                param: self
                    .param
                    .or(current.as_ref().map(|s| s.param))
                    .unwrap_or(ParamName::Alpha),
                values: self
                    .values
                    .clone()
                    .or(current.map(|s| s.values))
                    .unwrap_or_default(),
            });
        }
    }
}

/// A validated network ready to run.
struct Prepared {
    resolved: Resolved,
    delta: f64,
}

fn prepare(loaded: &LoadedConfig) -> Result<Prepared, CliError> {
    let resolved = loaded.resolve()?;
    let problems = resolved.spec.check(DEFAULT_TOL);
    if !problems.is_empty() {
        let msgs: Vec<String> = problems.iter().map(|e| e.to_string()).collect();
        return Err(CliError::Validation(msgs.join("; ")));
    }
    resolved.regime.protocol().check_spec(&resolved.spec)?;
    let delta = resolve_delta(&resolved.spec, resolved.delta)?;
    Ok(Prepared { resolved, delta })
}

fn resolve_delta(spec: &NetworkSpec, choice: DeltaChoice) -> Result<f64, CliError> {
    match choice {
        DeltaChoice::Fixed(d) if d >= 0.0 && d.is_finite() => Ok(d),
        DeltaChoice::Fixed(d) => Err(CliError::Validation(format!("delta must be nonnegative, got {d}"))),
        DeltaChoice::Estimate => Ok(estimate_delta(&spec.dynamics, &default_eps_grid())?.best()),
    }
}

fn initial_state(cfg: &RunConfig, spec: &NetworkSpec) -> Result<SystemState, CliError> {
    match &cfg.initial_nodes {
        Some(nodes) => {
            if nodes.len() != spec.num_nodes() || nodes.iter().any(|v| v.len() != spec.dim()) {
                return Err(CliError::Validation(format!(
                    "initial_nodes must hold {} vectors of dimension {}",
                    spec.num_nodes(),
                    spec.dim()
                )));
            }
            Ok(SystemState::from_vectors(nodes, &spec.target_initials, 0.0)?)
        }
        None => {
            if !(cfg.initial_half_width >= 0.0 && cfg.initial_half_width.is_finite()) {
                return Err(CliError::Validation("initial_half_width must be nonnegative".into()));
            }
            Ok(random_initial_state(spec, cfg.seed, cfg.initial_half_width))
        }
    }
}

fn prefix(cfg: &RunConfig) -> String {
    cfg.output.clone().unwrap_or_else(|| DEFAULT_PREFIX.to_string())
}

fn verdict(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn matrix_section(out: &mut String, name: &str, m: &Matrix, spec: &NetworkSpec) -> bool {
    writeln!(out, "matrix {name} ({}x{}):", m.rows(), m.cols()).unwrap();
    let a1 = is_class_a1(m, DEFAULT_TOL).unwrap_or(false);
    let a2 = is_class_a2(m, DEFAULT_TOL).unwrap_or(false);
    let a3 = is_class_a3(m, DEFAULT_TOL);
    writeln!(out, "  A1 (zero row sums, nonnegative off-diagonal, strongly connected): {}", verdict(a1)).unwrap();
    writeln!(out, "  A2 (A1 and symmetric): {}", verdict(a2)).unwrap();
    writeln!(out, "  A3 (zero row sums): {}", verdict(a3)).unwrap();
    match diagnose_a4(m, &spec.partition, DEFAULT_TOL) {
        Ok(d) => {
            writeln!(out, "  A4 under the partition: {}", verdict(d.passed())).unwrap();
            writeln!(out, "    symmetric: {}", verdict(d.symmetric)).unwrap();
            for b in &d.blocks {
                writeln!(
                    out,
                    "    block ({},{}) {:?}: {}",
                    b.row_cluster + 1,
                    b.col_cluster + 1,
                    b.requirement,
                    verdict(b.passed)
                )
                .unwrap();
            }
            d.passed()
        }
        Err(e) => {
            writeln!(out, "  A4 under the partition: fail ({e})").unwrap();
            false
        }
    }
}

pub fn cmd_validate(loaded: &LoadedConfig) -> Result<CommandOutput, CliError> {
    let resolved = loaded.resolve()?;
    let spec = &resolved.spec;
    let mut out = CommandOutput::default();
    let s = &mut out.stdout;
    writeln!(s, "regime: {}", resolved.regime.name()).unwrap();
    writeln!(
        s,
        "partition: {} nodes in {} clusters, sizes {:?}",
        spec.num_nodes(),
        spec.num_clusters(),
        spec.partition.sizes()
    )
    .unwrap();
    let mut ok = matrix_section(s, "A", spec.a.as_matrix(), spec);
    ok &= matrix_section(s, "B", spec.b.as_matrix(), spec);
    let problems: Vec<_> = spec
        .check(DEFAULT_TOL)
        .into_iter()
        .filter(|e| !matches!(e, clustersync::Error::Structure(_)))
        .collect();
    if problems.is_empty() {
        writeln!(s, "parameters: pass").unwrap();
    } else {
        writeln!(s, "parameters: fail").unwrap();
        for p in &problems {
            writeln!(s, "  {p}").unwrap();
        }
        ok = false;
    }
    match resolved.regime.protocol().check_spec(spec) {
        Ok(()) => writeln!(s, "regime shape: pass").unwrap(),
        Err(e) => {
            writeln!(s, "regime shape: fail ({e})").unwrap();
            ok = false;
        }
    }
    writeln!(s, "result: {}", if ok { "PASS" } else { "FAIL" }).unwrap();
    out.exit = if ok { 0 } else { 1 };
    Ok(out)
}

/// The bounds report as emitted, with fixed keys.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsJson {
    pub regime: &'static str,
    pub alpha: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eps2: f64,
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
    pub alpha_margin: f64,
    pub beta_margin: f64,
    pub feasible_alpha: bool,
    pub feasible_beta: bool,
    pub feasible: bool,
    /// Which gains the thresholds refer to.
    pub threshold_gains: [&'static str; 2],
    pub alpha_threshold: f64,
    pub beta_threshold: f64,
    pub t_max: Option<f64>,
}

impl BoundsJson {
    pub fn new(spec: &NetworkSpec, r: &BoundsReport) -> Self {
        let pinned_only = r.regime == clustersync::bounds::BoundRegime::MasterSlave;
        BoundsJson {
            regime: r.regime.name(),
            alpha: spec.alpha,
            beta: spec.beta,
            eps1: spec.eps1,
            eps2: spec.eps2,
            p: r.p,
            q: r.q,
            delta: r.delta,
            rho1: r.rho1,
            rho2: r.rho2,
            n_bar: r.n_bar,
            alpha_bar: r.alpha_bar,
            beta_bar: r.beta_bar,
            a_bar: r.a_bar,
            b_bar: r.b_bar,
            r_bar: r.r_bar,
            gamma1: r.gamma1,
            gamma2: r.gamma2,
            alpha_margin: r.alpha_margin(),
            beta_margin: r.beta_margin(),
            feasible_alpha: r.feasible_alpha,
            feasible_beta: r.feasible_beta,
            feasible: r.feasible(),
            threshold_gains: if pinned_only { ["eps1", "eps2"] } else { ["alpha", "beta"] },
            alpha_threshold: r.alpha_threshold,
            beta_threshold: r.beta_threshold,
            t_max: r.t_max,
        }
    }
}

fn bounds_summary(out: &mut String, b: &BoundsJson) {
    writeln!(out, "bounds ({}), delta = {}", b.regime, b.delta).unwrap();
    if let (Some(r1), Some(r2)) = (b.rho1, b.rho2) {
        writeln!(out, "  rho1 = {r1:.6}, rho2 = {r2:.6}").unwrap();
    }
    if let Some(n) = b.n_bar {
        writeln!(out, "  N_bar = {n}").unwrap();
    }
    writeln!(out, "  alpha_bar = {:.6}, beta_bar = {:.6}", b.alpha_bar, b.beta_bar).unwrap();
    writeln!(out, "  gamma1 = {:.6}, gamma2 = {:.6} (r_bar = {})", b.gamma1, b.gamma2, b.r_bar).unwrap();
    writeln!(
        out,
        "  thresholds: {} >= {:.4}, {} >= {:.4}",
        b.threshold_gains[0], b.alpha_threshold, b.threshold_gains[1], b.beta_threshold
    )
    .unwrap();
    writeln!(
        out,
        "  feasible: {} (first condition {}, second condition {})",
        b.feasible,
        verdict(b.feasible_alpha),
        verdict(b.feasible_beta)
    )
    .unwrap();
    match b.t_max {
        Some(t) => writeln!(out, "  T_max = {t:.6}").unwrap(),
        None => writeln!(out, "  T_max: not available (gains below threshold)").unwrap(),
    }
}

pub fn cmd_bounds(loaded: &LoadedConfig) -> Result<CommandOutput, CliError> {
    let prep = prepare(loaded)?;
    let spec = &prep.resolved.spec;
    let report = bounds_for(spec, prep.resolved.regime.protocol(), prep.delta)?;
    let json = BoundsJson::new(spec, &report);
    let mut out = CommandOutput::default();
    bounds_summary(&mut out.stdout, &json);
    if let Some(p) = &loaded.config.output {
        out.emit(with_suffix(p, ".bounds.json"), &to_json(&json))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
struct LyapunovJson {
    checked: usize,
    violations: usize,
    worst_excess: f64,
    worst_time: Option<f64>,
    guaranteed: bool,
}

impl From<LyapunovCheck> for LyapunovJson {
    fn from(c: LyapunovCheck) -> Self {
        LyapunovJson {
            checked: c.checked,
            violations: c.violations,
            worst_excess: c.worst_excess,
            worst_time: c.worst_time,
            guaranteed: c.guaranteed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SimulationJson {
    regime: &'static str,
    seed: u64,
    method: &'static str,
    step: f64,
    t_end: f64,
    record_stride: usize,
    settle_tol: f64,
    samples: usize,
    initial_nodes: Vec<Vec<f64>>,
    initial_targets: Vec<Vec<f64>>,
    settling_time: Option<f64>,
    final_error: f64,
    equilibrium_residual: Option<f64>,
    bounds: Option<BoundsJson>,
    bounds_error: Option<String>,
    lyapunov_check: Option<LyapunovJson>,
}

fn split_vectors(flat: &[f64], dim: usize) -> Vec<Vec<f64>> {
    flat.chunks(dim).map(<[f64]>::to_vec).collect()
}

pub fn cmd_simulate(loaded: &LoadedConfig) -> Result<CommandOutput, CliError> {
    let cfg = &loaded.config;
    let prep = prepare(loaded)?;
    let spec = &prep.resolved.spec;
    let regime = prep.resolved.regime;
    let protocol = regime.protocol();
    let icfg: IntegratorConfig = cfg.integrator.to_config();
    icfg.validate()?;
    let init = initial_state(cfg, spec)?;
    let mut out = CommandOutput::default();

    let equilibrium_residual = match (&spec.dynamics, regime) {
        (IntrinsicDynamics::Neural(nn), Regime::NnStabilization) => {
            let d = nn_stabilization_rhs(
                nn,
                spec.eps1,
                spec.eps2,
                spec.p,
                spec.q,
                &spec.target_initials[0],
                init.node(0),
                EQUILIBRIUM_TOL,
            )?;
            if d.residual_warning {
                writeln!(
                    out.stdout,
                    "warning: target is not an equilibrium (residual {:.3e}); the state will not settle on it",
                    d.equilibrium_residual
                )
                .unwrap();
            }
            Some(d.equilibrium_residual)
        }
        _ => None,
    };

    let traj = integrate(spec, protocol, &init, &icfg)?;
    let (bounds, bounds_error) = match bounds_for(spec, protocol, prep.delta) {
        Ok(r) => (Some((BoundsJson::new(spec, &r), r)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let check = bounds.as_ref().map(|(_, r)| lyapunov_inequality_check(&traj, r));

    let s = &mut out.stdout;
    writeln!(
        s,
        "{} regime: {} nodes, dimension {}, {:?} step {} to t = {}",
        regime.name(),
        spec.num_nodes(),
        spec.dim(),
        icfg.method,
        icfg.step,
        icfg.t_end
    )
    .unwrap();
    match traj.settling_time {
        Some(t) => writeln!(s, "settling time (E < {}): {t}", icfg.settle_tol).unwrap(),
        None => writeln!(s, "settling time (E < {}): not reached by t = {}", icfg.settle_tol, icfg.t_end).unwrap(),
    }
    writeln!(s, "final error E = {:.3e}", traj.final_error()).unwrap();
    match (&bounds, &bounds_error) {
        (Some((b, _)), _) => match b.t_max {
            Some(t) => writeln!(s, "theoretical T_max: {t:.6}").unwrap(),
            None => writeln!(
                s,
                "theoretical T_max: unavailable (margins {:.4}, {:.4}; thresholds {:.4}, {:.4})",
                b.alpha_margin, b.beta_margin, b.alpha_threshold, b.beta_threshold
            )
            .unwrap(),
        },
        (None, Some(e)) => writeln!(s, "theoretical T_max: unavailable ({e})").unwrap(),
        _ => {}
    }
    if let Some(c) = check {
        writeln!(
            s,
            "Lyapunov check: {} violations in {} interior samples{}",
            c.violations,
            c.checked,
            if c.guaranteed { "" } else { " (informational: bounds infeasible)" }
        )
        .unwrap();
    }

    let summary = SimulationJson {
        regime: regime.name(),
        seed: cfg.seed,
        method: match icfg.method {
            clustersync::sim::Method::ExplicitEuler => "euler",
            clustersync::sim::Method::ClassicalRk4 => "rk4",
        },
        step: icfg.step,
        t_end: icfg.t_end,
        record_stride: icfg.record_stride,
        settle_tol: icfg.settle_tol,
        samples: traj.len(),
        initial_nodes: split_vectors(&init.nodes, init.dim()),
        initial_targets: split_vectors(&init.targets, init.dim()),
        settling_time: traj.settling_time,
        final_error: traj.final_error(),
        equilibrium_residual,
        bounds: bounds.map(|(b, _)| b),
        bounds_error,
        lyapunov_check: check.map(Into::into),
    };
    write_trajectory(&mut out, cfg, &traj, &summary)?;
    Ok(out)
}

fn write_trajectory(
    out: &mut CommandOutput,
    cfg: &RunConfig,
    traj: &Trajectory,
    summary: &SimulationJson,
) -> Result<(), CliError> {
    let p = prefix(cfg);
    if cfg.formats.contains(&Format::Csv) {
        out.emit(with_suffix(&p, ".trajectory.csv"), &trajectory_csv(traj))?;
    }
    if cfg.formats.contains(&Format::Json) {
        out.emit(with_suffix(&p, ".summary.json"), &to_json(summary))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SweepRowJson {
    value: f64,
    settling_measured: Option<f64>,
    t_max_theoretical: Option<f64>,
    feasible: bool,
    failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct SweepJson {
    param: &'static str,
    seed: u64,
    step: f64,
    t_end: f64,
    settle_tol: f64,
    rows: Vec<SweepRowJson>,
    settling_strictly_decreasing: bool,
}

/// True when every row settled and settling strictly decreases as the
/// swept value increases.
pub fn strictly_decreasing(rows: &[SweepRow]) -> bool {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    let times: Option<Vec<f64>> = sorted.iter().map(|r| r.settling).collect();
    times.is_some_and(|t| t.windows(2).all(|w| w[1] < w[0]))
}

/// Runs the rows on separate threads; results keep the input order.
pub fn parallel_sweep(
    spec: &NetworkSpec,
    protocol: clustersync::dynamics::Protocol,
    param: SweepParameter,
    values: &[f64],
    init: &SystemState,
    icfg: &IntegratorConfig,
    delta: f64,
) -> Vec<SweepRow> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(values.len().max(1));
    let chunk = values.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .chunks(chunk)
            .map(|vs| {
                scope.spawn(move || {
                    vs.iter()
                        .map(|&v| sweep_row(spec, protocol, param, v, init, icfg, delta))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param_value,settling_measured,T_max_theoretical,feasible\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.value, fmt_opt(r.settling), fmt_opt(r.t_max), r.feasible).unwrap();
    }
    out
}

pub fn cmd_sweep(loaded: &LoadedConfig) -> Result<CommandOutput, CliError> {
    let cfg = &loaded.config;
    let settings = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Parse("sweep needs `sweep` in the config or --param/--values".into()))?;
    if settings.values.is_empty() {
        return Err(CliError::Parse("sweep values are empty".into()));
    }
    let prep = prepare(loaded)?;
    let spec = &prep.resolved.spec;
    let protocol = prep.resolved.regime.protocol();
    let icfg = cfg.integrator.to_config();
    icfg.validate()?;
    let init = initial_state(cfg, spec)?;
    let param: SweepParameter = settings.param.into();
    let rows = parallel_sweep(spec, protocol, param, &settings.values, &init, &icfg, prep.delta);
    let decreasing = strictly_decreasing(&rows);

    let mut out = CommandOutput::default();
    let s = &mut out.stdout;
    writeln!(s, "sweep over {} ({} values)", param.name(), rows.len()).unwrap();
    for r in &rows {
        let settle = r.settling.map_or("not settled".to_string(), |t| format!("{t}"));
        let tmax = r.t_max.map_or("-".to_string(), |t| format!("{t:.4}"));
        write!(s, "  {} = {}: settling {settle}, T_max {tmax}, feasible {}", param.name(), r.value, r.feasible).unwrap();
        if let Some(f) = &r.failure {
            write!(s, " [{f}]").unwrap();
        }
        s.push('\n');
    }
    writeln!(
        s,
        "settling strictly decreasing in {}: {}",
        param.name(),
        if decreasing { "yes" } else { "no" }
    )
    .unwrap();

    let p = prefix(cfg);
    if cfg.formats.contains(&Format::Csv) {
        out.emit(with_suffix(&p, ".sweep.csv"), &sweep_csv(&rows))?;
    }
    if cfg.formats.contains(&Format::Json) {
        let json = SweepJson {
            param: param.name(),
            seed: cfg.seed,
            step: icfg.step,
            t_end: icfg.t_end,
            settle_tol: icfg.settle_tol,
            rows: rows
                .iter()
                .map(|r| SweepRowJson {
                    value: r.value,
                    settling_measured: r.settling,
                    t_max_theoretical: r.t_max,
                    feasible: r.feasible,
                    failure: r.failure.clone(),
                })
                .collect(),
            settling_strictly_decreasing: decreasing,
        };
        out.emit(with_suffix(&p, ".sweep.json"), &to_json(&json))?;
    }
    Ok(out)
}

/// One line of the reproduction table.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: &'static str,
    pub computed: Option<f64>,
    pub published: Option<f64>,
    pub tolerance: Option<f64>,
    /// `None` for informational rows.
    pub agree: Option<bool>,
    pub note: &'static str,
}

impl Comparison {
    fn new(quantity: &'static str, computed: Option<f64>, published: f64, tol: f64, note: &'static str) -> Self {
        let agree = computed.is_some_and(|c| (c - published).abs() <= tol);
        Comparison {
            quantity,
            computed,
            published: Some(published),
            tolerance: Some(tol),
            agree: Some(agree),
            note,
        }
    }

    fn info(quantity: &'static str, computed: Option<f64>, published: Option<f64>, note: &'static str) -> Self {
        Comparison {
            quantity,
            computed,
            published,
            tolerance: None,
            agree: None,
            note,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Reproduction {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub seed: u64,
    pub step: f64,
    pub t_end: f64,
    pub bounds: BoundsJson,
    pub comparisons: Vec<Comparison>,
    pub settling_time: Option<f64>,
    pub lyapunov_violations: usize,
}

/// Smallest feasible `β` above the computed threshold, rounded up to 5.
fn feasible_beta(threshold: f64) -> f64 {
    ((threshold / 5.0).floor() + 1.0) * 5.0
}

pub fn reproduce_example(cfg: &RunConfig) -> Result<Reproduction, CliError> {
    let (alpha, beta) = (presets::EXAMPLE_ALPHA, presets::EXAMPLE_BETA);
    let delta = presets::EXAMPLE_DELTA;
    let spec = presets::example_network(alpha, beta);
    let report = clustersync::bounds::compute_bounds(&spec, delta)?;
    let b = BoundsJson::new(&spec, &report);

    let beta_ok = feasible_beta(report.beta_threshold);
    let feasible_report =
        clustersync::bounds::compute_bounds(&presets::example_network(alpha, beta_ok), delta)?;
    let coarse_delta = spectral_norm(&presets::chaotic_weights())? - 1.0;

    let icfg = cfg.integrator.to_config();
    icfg.validate()?;
    let init = random_initial_state(&spec, cfg.seed, cfg.initial_half_width);
    let traj = integrate(&spec, clustersync::dynamics::Protocol::Cluster, &init, &icfg)?;
    let check = lyapunov_inequality_check(&traj, &report);

    let comparisons = vec![
        Comparison::new("rho1", report.rho1, published::RHO1, 5e-4, ""),
        Comparison::new("rho2", report.rho2, published::RHO2, 5e-4, ""),
        Comparison::new("N_bar", report.n_bar.map(|n| n as f64), published::N_BAR as f64, 0.0, ""),
        Comparison::new("alpha_bar/alpha", Some(report.alpha_bar / alpha), published::ALPHA_BAR_PER_ALPHA, 5e-4, ""),
        Comparison::new("beta_bar/beta", Some(report.beta_bar / beta), published::BETA_BAR_PER_BETA, 5e-4, ""),
        Comparison::new("gamma1", Some(report.gamma1), published::GAMMA1, 5e-4, ""),
        Comparison::new(
            "gamma2",
            Some(report.gamma2),
            published::GAMMA2,
            5e-4,
            "formula uses r_bar = max_k(N - s_k) = 3; the published value equals r_bar = 2",
        ),
        Comparison::new("alpha threshold", Some(report.alpha_threshold), published::ALPHA_THRESHOLD, 0.05, ""),
        Comparison::new(
            "beta threshold",
            Some(report.beta_threshold),
            published::BETA_THRESHOLD,
            0.05,
            "follows from gamma2; beta = 130 is below the computed threshold",
        ),
        Comparison::new(
            "T_max at alpha=30, beta=130",
            report.t_max,
            published::T_MAX,
            5e-4,
            "computed bound is infeasible at these gains, so no T_max exists",
        ),
        Comparison::info(
            "T_max at the smallest feasible beta (multiple of 5)",
            feasible_report.t_max,
            None,
            "beta raised to the next multiple of 5 above the computed threshold",
        ),
        Comparison {
            quantity: "coarse QUAD delta (sigma_max(W) - 1)",
            computed: Some(coarse_delta),
            published: Some(delta),
            tolerance: None,
            agree: Some(coarse_delta <= delta),
            note: "agrees when the coarse estimate does not exceed the stated delta",
        },
        Comparison::info(
            "measured settling time",
            traj.settling_time,
            Some(published::MEASURED_SETTLING),
            "initial node states are unpublished; the caption states 0.1375",
        ),
    ];

    Ok(Reproduction {
        alpha,
        beta,
        delta,
        seed: cfg.seed,
        step: icfg.step,
        t_end: icfg.t_end,
        bounds: b,
        comparisons,
        settling_time: traj.settling_time,
        lyapunov_violations: check.violations,
    })
}

fn comparison_csv(rows: &[Comparison]) -> String {
    let mut out = String::from("quantity,computed,published,tolerance,agree\n");
    for r in rows {
        let agree = match r.agree {
            Some(true) => "agree",
            Some(false) => "disagree",
            None => "info",
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            r.quantity.replace(',', ";"),
            fmt_opt(r.computed),
            fmt_opt(r.published),
            fmt_opt(r.tolerance),
            agree
        )
        .unwrap();
    }
    out
}

pub fn cmd_reproduce(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let ex = reproduce_example(cfg)?;
    let mut out = CommandOutput::default();
    let s = &mut out.stdout;
    writeln!(
        s,
        "five-node example, alpha = {}, beta = {}, delta = {}, seed {}",
        ex.alpha, ex.beta, ex.delta, ex.seed
    )
    .unwrap();
    writeln!(s, "{:<52} {:>12} {:>12}  {}", "quantity", "computed", "published", "status").unwrap();
    for c in &ex.comparisons {
        let status = match c.agree {
            Some(true) => "agree",
            Some(false) => "DISAGREE",
            None => "info",
        };
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        writeln!(s, "{:<52} {:>12} {:>12}  {}", c.quantity, num(c.computed), num(c.published), status).unwrap();
        if !c.note.is_empty() && c.agree != Some(true) {
            writeln!(s, "    {}", c.note).unwrap();
        }
    }
    writeln!(s, "Lyapunov check at the stated gains: {} violations (informational)", ex.lyapunov_violations).unwrap();
    if let Some(p) = &cfg.output {
        if cfg.formats.contains(&Format::Csv) {
            out.emit(with_suffix(p, ".reproduction.csv"), &comparison_csv(&ex.comparisons))?;
        }
        if cfg.formats.contains(&Format::Json) {
            out.emit(with_suffix(p, ".reproduction.json"), &to_json(&ex))?;
        }
    }
    Ok(out)
}
