//! Run configuration: a JSON document naming a scenario, a regime and the
//! integration settings.
//!
//! Matrices are given inline as row arrays or as a path (relative to the
//! config file) to a plain-text file with one whitespace-separated row per
//! line; `#` starts a comment.

use std::fs;
use std::path::{Path, PathBuf};

use clustersync::dynamics::{
    Activation, IntrinsicDynamics, NetworkSpec, NeuralDynamics, Protocol, DEFAULT_DEAD_ZONE,
};
use clustersync::matrices::{ClusterPartition, CouplingMatrix};
use clustersync::presets;
use clustersync::sim::{IntegratorConfig, Method, SweepParameter, DEFAULT_SEED, DEFAULT_SETTLE_TOL};
use clustersync::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub regime: Regime,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// QUAD constant; defaults to the preset's value, `0` for zero dynamics,
    /// and an estimate otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaSetting>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Half-width of the uniform box the random node states are drawn from.
    #[serde(default = "default_half_width")]
    pub initial_half_width: f64,
    /// Explicit node states; overrides the seeded draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_nodes: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSettings>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_half_width() -> f64 {
    1.0
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Preset(PresetScenario),
    Inline(InlineSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetScenario {
    /// `example`: the five-node chaotic network.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Pinning gains default to the coupling gains.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSpec {
    pub cluster_sizes: Vec<usize>,
    /// May be omitted for a single node (taken as the 1x1 zero matrix).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixSource>,
    /// Defaults to `a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixSource>,
    pub alpha: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub p: f64,
    pub q: f64,
    pub dynamics: DynamicsSpec,
    /// Initial target states, one per cluster (the equilibrium for
    /// `nn-stabilization`).
    pub targets: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dead_zone: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Rows(Vec<Vec<f64>>),
    File(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DynamicsSpec {
    Zero { dim: usize },
    /// `ẋ = W1 x + W2 φ(x) + J`.
    Neural {
        w1: MatrixSource,
        w2: MatrixSource,
        #[serde(default)]
        activation: ActivationName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias: Option<Vec<f64>>,
    },
    /// The chaotic three-neuron network of the `example` preset.
    Chaotic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationName {
    #[default]
    Saturation,
    Tanh,
    Identity,
}

impl From<ActivationName> for Activation {
    fn from(a: ActivationName) -> Self {
        match a {
            ActivationName::Saturation => Activation::Saturation,
            ActivationName::Tanh => Activation::Tanh,
            ActivationName::Identity => Activation::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    #[default]
    Cluster,
    Complete,
    MasterSlave,
    NnStabilization,
    /// Cluster protocol with the intrinsic dynamics switched off.
    Consensus,
}

impl Regime {
    pub fn protocol(self) -> Protocol {
        match self {
            Regime::Cluster | Regime::Consensus => Protocol::Cluster,
            Regime::Complete => Protocol::Complete,
            Regime::MasterSlave => Protocol::MasterSlave,
            Regime::NnStabilization => Protocol::NnStabilization,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Cluster => "cluster",
            Regime::Complete => "complete",
            Regime::MasterSlave => "master-slave",
            Regime::NnStabilization => "nn-stabilization",
            Regime::Consensus => "consensus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSetting {
    Value(f64),
    Keyword(DeltaKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaKeyword {
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default)]
    pub method: MethodName,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default = "default_settle_tol")]
    pub settle_tol: f64,
}

fn default_step() -> f64 {
    1e-4
}

fn default_t_end() -> f64 {
    2.0
}

fn default_stride() -> usize {
    1
}

fn default_settle_tol() -> f64 {
    DEFAULT_SETTLE_TOL
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            method: MethodName::default(),
            step: default_step(),
            t_end: default_t_end(),
            record_stride: default_stride(),
            settle_tol: default_settle_tol(),
        }
    }
}

impl IntegratorSettings {
    pub fn to_config(self) -> IntegratorConfig {
        IntegratorConfig {
            method: match self.method {
                MethodName::Euler => Method::ExplicitEuler,
                MethodName::Rk4 => Method::ClassicalRk4,
            },
            step: self.step,
            t_end: self.t_end,
            record_stride: self.record_stride,
            settle_tol: self.settle_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Euler,
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub param: ParamName,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ParamName {
    Alpha,
    Beta,
    P,
    Q,
}

impl From<ParamName> for SweepParameter {
    fn from(p: ParamName) -> Self {
        match p {
            ParamName::Alpha => SweepParameter::Alpha,
            ParamName::Beta => SweepParameter::Beta,
            ParamName::P => SweepParameter::P,
            ParamName::Q => SweepParameter::Q,
        }
    }
}

/// A parsed config plus the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl RunConfig {
    /// Parses JSON text, reporting the offending field path and position.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Parse(format!(
                "line {} column {}, field `{}`: {}",
                inner.line(),
                inner.column(),
                path,
                inner
            ))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        let config = Self::from_json(&text)
            .map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e.message())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, base_dir })
    }

    /// The example network with the headline gains.
    pub fn example() -> Self {
        RunConfig {
            scenario: Scenario::Preset(PresetScenario {
                name: "example".into(),
                alpha: Some(presets::EXAMPLE_ALPHA),
                beta: Some(presets::EXAMPLE_BETA),
                eps1: None,
                eps2: None,
                p: None,
                q: None,
            }),
            regime: Regime::Cluster,
            integrator: IntegratorSettings::default(),
            delta: None,
            seed: DEFAULT_SEED,
            initial_half_width: default_half_width(),
            initial_nodes: None,
            output: None,
            formats: default_formats(),
            sweep: None,
        }
    }
}

fn read_matrix_file(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read matrix file {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    CliError::Parse(format!("{}:{}: not a number: {t:?}", path.display(), lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Matrix::from_rows(&rows).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

impl MatrixSource {
    pub fn resolve(&self, base_dir: &Path) -> Result<Matrix, CliError> {
        match self {
            MatrixSource::Rows(rows) => {
                Matrix::from_rows(rows).map_err(|e| CliError::Parse(format!("matrix rows: {e}")))
            }
            MatrixSource::File(p) => read_matrix_file(&base_dir.join(p)),
        }
    }
}

/// Everything a command needs, resolved from a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: NetworkSpec,
    pub regime: Regime,
    pub delta: DeltaChoice,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaChoice {
    Fixed(f64),
    Estimate,
}

fn coupling(m: Matrix) -> Result<CouplingMatrix, CliError> {
    CouplingMatrix::new(m).map_err(|e| CliError::Validation(e.to_string()))
}

impl LoadedConfig {
    /// Builds the network; shapes are checked here, classes by the caller.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let cfg = &self.config;
        let (mut spec, preset_delta) = match &cfg.scenario {
            Scenario::Preset(ps) => {
                if ps.name != "example" {
                    return Err(CliError::Parse(format!(
                        "unknown preset {:?} (available: example)",
                        ps.name
                    )));
                }
                let alpha = ps.alpha.unwrap_or(presets::EXAMPLE_ALPHA);
                let beta = ps.beta.unwrap_or(presets::EXAMPLE_BETA);
                let mut spec = presets::example_network(alpha, beta);
                spec.eps1 = ps.eps1.unwrap_or(alpha);
                spec.eps2 = ps.eps2.unwrap_or(beta);
                spec.p = ps.p.unwrap_or(presets::EXAMPLE_P);
                spec.q = ps.q.unwrap_or(presets::EXAMPLE_Q);
                (spec, Some(presets::EXAMPLE_DELTA))
            }
            Scenario::Inline(s) => (self.inline_spec(s)?, None),
        };
        if cfg.regime == Regime::Consensus {
            spec.dynamics = IntrinsicDynamics::Zero { dim: spec.dim() };
        }
        let delta = match cfg.delta {
            Some(DeltaSetting::Value(v)) => DeltaChoice::Fixed(v),
            Some(DeltaSetting::Keyword(DeltaKeyword::Estimate)) => DeltaChoice::Estimate,
            None if spec.dynamics.is_zero() => DeltaChoice::Fixed(0.0),
            None => preset_delta.map_or(DeltaChoice::Estimate, DeltaChoice::Fixed),
        };
        Ok(Resolved {
            spec,
            regime: cfg.regime,
            delta,
        })
    }

    fn inline_spec(&self, s: &InlineSpec) -> Result<NetworkSpec, CliError> {
        let partition = ClusterPartition::from_sizes(&s.cluster_sizes)
            .map_err(|e| CliError::Validation(format!("cluster_sizes: {e}")))?;
        let n_nodes = partition.num_nodes();
        let a = match &s.a {
            Some(src) => src.resolve(&self.base_dir)?,
            None if n_nodes == 1 => Matrix::zeros(1, 1),
            None => return Err(CliError::Parse("matrix `a` is required for more than one node".into())),
        };
        let b = match &s.b {
            Some(src) => src.resolve(&self.base_dir)?,
            None => a.clone(),
        };
        let dynamics = match &s.dynamics {
            DynamicsSpec::Zero { dim } => IntrinsicDynamics::Zero { dim: *dim },
            DynamicsSpec::Chaotic => presets::chaotic_neural_dynamics(),
            DynamicsSpec::Neural {
                w1,
                w2,
                activation,
                bias,
            } => {
                let w1 = w1.resolve(&self.base_dir)?;
                let w2 = w2.resolve(&self.base_dir)?;
                let bias = bias.clone().unwrap_or_else(|| vec![0.0; w1.rows()]);
                IntrinsicDynamics::Neural(
                    NeuralDynamics::new(w1, w2, (*activation).into(), bias)
                        .map_err(|e| CliError::Validation(format!("dynamics: {e}")))?,
                )
            }
        };
        Ok(NetworkSpec {
            partition,
            a: coupling(a)?,
            b: coupling(b)?,
            alpha: s.alpha,
            beta: s.beta,
            eps1: s.eps1,
            eps2: s.eps2,
            p: s.p,
            q: s.q,
            dynamics,
            target_initials: s.targets.clone(),
            dead_zone: s.dead_zone.unwrap_or(DEFAULT_DEAD_ZONE),
        })
    }
}
