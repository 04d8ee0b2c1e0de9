//! Experiment configuration schemas.
//!
//! Every schema rejects unknown keys and requires an explicit seed;
//! nothing ever defaults to wall-clock state, so a saved config plus the
//! binary version fully determines the output bytes.

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use sumrate::geometry::{self, NetworkLayout, TxPlacement};
use sumrate::op::OpInstance;
use sumrate::snr::{ChannelParams, PathLoss, UserModel};

pub fn parse<T: DeserializeOwned>(raw: &Value) -> anyhow::Result<T> {
    serde_json::from_value(raw.clone()).context("config does not match the experiment schema")
}

/// Network geometry for experiments that draw realizations.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayoutConfig {
    Dense {
        b: usize,
        p: f64,
        cell_radius: f64,
        r0: f64,
        #[serde(default)]
        placement: Option<TxPlacement>,
    },
    HexExtended {
        b: usize,
        cell_radius: f64,
        r0: f64,
    },
}

impl LayoutConfig {
    pub fn build(&self, seed: u64) -> sumrate::Result<NetworkLayout> {
        match self {
            LayoutConfig::Dense {
                b,
                p,
                cell_radius,
                r0,
                placement,
            } => geometry::build_dense_layout(
                *b,
                *p,
                *cell_radius,
                *r0,
                placement.clone().unwrap_or(TxPlacement::UniformRandom),
                seed,
            ),
            LayoutConfig::HexExtended { b, cell_radius, r0 } => {
                geometry::build_hex_layout(*b, *cell_radius, *r0)
            }
        }
    }
}

/// Path-loss constants for experiments with no simulated realizations.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub alpha: f64,
    pub beta: f64,
    pub r0: f64,
}

impl PathConfig {
    pub fn build(&self) -> sumrate::Result<PathLoss> {
        PathLoss::new(self.alpha, self.beta, self.r0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub seed: u64,
    pub layout: LayoutConfig,
    pub channel: ChannelParams,
    #[serde(default)]
    pub users: UserModel,
    pub k_values: Vec<usize>,
    pub num_channels: usize,
    pub trials: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSweepConfig {
    pub seed: u64,
    pub fading: sumrate::fading::FadingModel,
    pub path: PathConfig,
    /// Transmitter offset from the disc center, used only by the
    /// empirical quantile path.
    pub d: f64,
    /// User disc radius.
    pub p: f64,
    pub k_values: Vec<f64>,
    /// Also estimate each level empirically (slower).
    #[serde(default)]
    pub numeric: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSpec {
    pub k: f64,
    pub s1: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioSpec {
    pub c1: f64,
    pub c2: f64,
    pub hk: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSolveConfig {
    pub seed: u64,
    pub instance: OpInstance,
    #[serde(default)]
    pub bracket: Option<BracketSpec>,
    #[serde(default)]
    pub ratio_check: Option<RatioSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSimConfig {
    pub seed: u64,
    pub layout: LayoutConfig,
    pub channel: ChannelParams,
    #[serde(default)]
    pub users: UserModel,
    pub k: usize,
    pub num_channels: usize,
    pub trials: usize,
    /// Explicit per-(transmitter, channel) powers; equal split of the
    /// budget when omitted.
    #[serde(default)]
    pub powers: Option<Vec<Vec<f64>>>,
}

fn default_c_over_sbar() -> f64 {
    10.0
}

fn default_sbar_over_c() -> f64 {
    0.1
}

fn default_rho_min() -> f64 {
    1.0
}

fn default_rho_max() -> f64 {
    20.0
}

fn default_rho_step() -> f64 {
    0.01
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub seed: u64,
    #[serde(default = "default_c_over_sbar")]
    pub c_over_sbar: f64,
    #[serde(default = "default_sbar_over_c")]
    pub sbar_over_c: f64,
    /// Multipliers to trace stationarity curves for.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_rho_min")]
    pub rho_min: f64,
    #[serde(default = "default_rho_max")]
    pub rho_max: f64,
    #[serde(default = "default_rho_step")]
    pub rho_step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MisoConfig {
    pub seed: u64,
    pub instance: OpInstance,
    pub m: usize,
}
