//! Run configuration file schema.

use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Idealistic,
    Optimistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnclosureName {
    Explicit,
    Fixpoint,
    Tightest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcitationName {
    Zero,
    Random,
    SingleAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideInfoName {
    Lipschitz,
    Heading,
    Exact,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `unicycle`, `quadrotor`, `aircraft` or `custom`.
    pub system: Option<String>,
    pub seed: Option<u64>,
    pub mode: Option<ModeName>,
    pub reach: Option<ReachSection>,
    pub control: Option<ControlSection>,
    pub benchmark: Option<BenchmarkSection>,
    pub custom: Option<CustomSection>,
}

/// One component `offset + amplitude cos(freq (t - t_ref)) + delta`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlComponent {
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub freq: f64,
    #[serde(default)]
    pub delta: [f64; 2],
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachSection {
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    /// Samples in the generated excitation trajectory.
    pub init_len: Option<usize>,
    /// Hold time of each excitation control.
    pub sample_dt: Option<f64>,
    pub x0: Option<Vec<f64>>,
    /// Start of the tube; defaults to the end of the excitation trajectory.
    pub x_start: Option<Vec<f64>>,
    pub t_ref: Option<f64>,
    pub side_info: Option<SideInfoName>,
    pub trajectory: Option<PathBuf>,
    pub enclosure: Option<EnclosureName>,
    pub excitation: Option<ExcitationName>,
    pub excitation_scale: Option<f64>,
    pub controls: Option<Vec<ControlComponent>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CostSection {
    /// `weight * ||x||^2`.
    Norm { weight: f64 },
    /// `weight * (x_component - target)^2` with a 1-based component.
    Setpoint { component: usize, target: f64, weight: f64 },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub dt: Option<f64>,
    pub init_len: Option<usize>,
    pub max_steps: Option<usize>,
    pub stop_level: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub mu0: Option<f64>,
    /// Fixed `[w_plus, w_minus]`; drawn from the seed when absent.
    pub weights: Option<[f64; 2]>,
    pub refresh_every: Option<usize>,
    pub enclosure: Option<EnclosureName>,
    pub excitation: Option<ExcitationName>,
    pub excitation_scale: Option<f64>,
    pub cost: Option<CostSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub systems: Option<Vec<String>>,
    pub modes: Option<Vec<ModeName>>,
    pub seeds: Option<Vec<u64>>,
    pub max_steps: Option<usize>,
    /// Knowledge base sizes for the per-step timing sweep.
    pub scaling: Option<Vec<usize>>,
    pub scaling_reps: Option<usize>,
}

/// Data-only system description used with a trajectory file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub n: usize,
    pub m: usize,
    pub u: Vec<[f64; 2]>,
    pub x: Vec<[f64; 2]>,
    pub lf: Vec<f64>,
    pub lg: Vec<Vec<f64>>,
    /// 1-based state indices `f` may depend on.
    pub f_vars: Option<Vec<usize>>,
    /// 1-based state indices `G` may depend on.
    pub g_vars: Option<Vec<usize>>,
}
