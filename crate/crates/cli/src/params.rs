//! Typed parameters per command, merged from an optional JSON config file
//! and command-line flags (flags win).

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "gaplab", version, about = "Spectral-gap laboratory: reduced eigenproblems, Airy asymptotics and the gap pipeline")]
pub struct Cli {
    /// JSON config file: `{"parameters": {...}, "output_path": ..., "format": ...}`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; relative paths resolve against $GAPLAB_OUT_DIR when set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate Ai, Ai', Bi, Bi' and the Wronskian on a uniform grid.
    AiryTable(AiryTableArgs),
    /// Lowest eigenpairs of one reduced problem.
    Eigen(EigenArgs),
    /// Airy-frame rates over a μ-sweep.
    RescaleSweep(RescaleSweepArgs),
    /// Scaled gap-derivative integral over a μ-sweep.
    CorollarySweep(CorollarySweepArgs),
    /// Seeded battery of random perturbation instances.
    PerturbBattery(PerturbBatteryArgs),
    /// Full pipeline for a prescribed diameter.
    Theorem(TheoremArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::AiryTable(_) => "airy-table",
            Command::Eigen(_) => "eigen",
            Command::RescaleSweep(_) => "rescale-sweep",
            Command::CorollarySweep(_) => "corollary-sweep",
            Command::PerturbBattery(_) => "perturb-battery",
            Command::Theorem(_) => "theorem",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AiryTableArgs {
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AiryTableParams {
    pub x_min: f64,
    pub x_max: f64,
    pub step: f64,
}

impl Default for AiryTableParams {
    fn default() -> Self {
        AiryTableParams {
            x_min: -10.0,
            x_max: 5.0,
            step: 0.01,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Radians.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    /// Number of eigenpairs.
    #[arg(long = "K")]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Emit sampled eigenfunctions `(k, x, y, y')` instead of the eigenvalue table.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub functions: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenParams {
    pub n: u32,
    pub phi0: f64,
    pub mu: f64,
    pub t: f64,
    pub j: u32,
    #[serde(rename = "K")]
    pub count: usize,
    pub tol: f64,
    /// Defaults to the problem's Airy-resolving grid.
    pub grid_points: Option<usize>,
    pub functions: bool,
}

impl Default for EigenParams {
    fn default() -> Self {
        EigenParams {
            n: 2,
            phi0: FRAC_PI_4,
            mu: 1e4,
            t: 0.0,
            j: 1,
            count: 2,
            tol: 1e-12,
            grid_points: None,
            functions: false,
        }
    }
}

pub fn default_mus() -> Vec<f64> {
    vec![1e4, 1e5, 1e6, 1e7]
}

#[derive(Debug, Args, Serialize)]
pub struct RescaleSweepArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[arg(long = "K")]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RescaleSweepParams {
    pub n: u32,
    pub phi0: f64,
    pub mu: Vec<f64>,
    #[serde(rename = "K")]
    pub count: usize,
}

impl Default for RescaleSweepParams {
    fn default() -> Self {
        RescaleSweepParams {
            n: 2,
            phi0: FRAC_PI_4,
            mu: default_mus(),
            count: 2,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CorollarySweepArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorollarySweepParams {
    pub n: u32,
    pub phi0: f64,
    pub mu: Vec<f64>,
}

impl Default for CorollarySweepParams {
    fn default() -> Self {
        CorollarySweepParams {
            n: 2,
            phi0: FRAC_PI_4,
            mu: default_mus(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PerturbBatteryArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbBatteryParams {
    pub seed: u64,
    pub count: usize,
}

impl Default for PerturbBatteryParams {
    fn default() -> Self {
        PerturbBatteryParams { seed: 1, count: 500 }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TheoremArgs {
    /// Target diameter.
    #[arg(long = "D0")]
    #[serde(rename = "D0", skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// μ ladder, tried in order.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    /// Headline `t` as a multiple of Γ(0).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_factor: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diameter_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremParams {
    #[serde(rename = "D0")]
    pub d0: f64,
    pub n: u32,
    pub mu: Vec<f64>,
    pub t_factor: f64,
    pub boundary_samples: usize,
    pub diameter_tol: f64,
}

impl Default for TheoremParams {
    fn default() -> Self {
        let c = gaplab::theorem::TheoremConfig::default();
        TheoremParams {
            d0: 1.0,
            n: 2,
            mu: c.mu_ladder,
            t_factor: c.t_factor,
            boundary_samples: c.boundary_samples,
            diameter_tol: c.diameter_tol,
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// File parameters overlaid with the flags that were actually given.
pub fn merge<A: Serialize, P: DeserializeOwned>(file: &Map<String, Value>, flags: &A) -> Result<P, CliError> {
    let mut merged = file.clone();
    match serde_json::to_value(flags) {
        Ok(Value::Object(given)) => merged.extend(given),
        Ok(_) => {}
        Err(e) => return Err(CliError::Usage(e.to_string())),
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid parameters: {e}")))
}
