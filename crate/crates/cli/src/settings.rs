//! Command-line flags and the flat settings record they share with `--config` files.

use std::path::{Path, PathBuf};

use aggregation::measure::{InitialKind, Spacing};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(name = "aggregation", version, about = "Radial aggregation flows with power-law kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON file with settings; flags given on the command line win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the averaged kernel ψ(ρ)
    Kernel(KernelArgs),
    /// Integrate the ring system from discretized initial data
    Simulate(SimulateArgs),
    /// Check kernel properties, and the initial speed lower bound when --data is given
    Verify(VerifyArgs),
    /// Two-ring similarity search and the d ≥ 3 witness
    Similarity(SimilarityArgs),
    /// Collapse time against initial radius for power-law data
    Scaling(ScalingArgs),
    /// Critical ratio curve for logarithmic data
    Ratio(RatioArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
            Command::Similarity(_) => "similarity",
            Command::Scaling(_) => "scaling",
            Command::Ratio(_) => "ratio",
        }
    }

    fn flags(&self) -> serde_json::Result<Value> {
        match self {
            Command::Kernel(a) => serde_json::to_value(a),
            Command::Simulate(a) => serde_json::to_value(a),
            Command::Verify(a) => serde_json::to_value(a),
            Command::Similarity(a) => serde_json::to_value(a),
            Command::Scaling(a) => serde_json::to_value(a),
            Command::Ratio(a) => serde_json::to_value(a),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RunFlags {
    /// Directory for artifacts [default: out]
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Seed for Monte Carlo checks [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelFlags {
    /// Dimension, at least 2 [default: 3]
    #[arg(long)]
    pub d: Option<usize>,
    /// Kernel exponent α [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DataFlags {
    /// Initial data: power_law, log_critical_alpha1 or log_critical_general
    #[arg(long, value_parser = snake::<InitialKind>)]
    pub data: Option<InitialKind>,
    /// Logarithmic exponent k
    #[arg(long)]
    pub k: Option<f64>,
    /// Power-law exponent ε
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of rings [default: 2000, verify: 4000]
    #[arg(long)]
    pub rings: Option<usize>,
    /// Inner edge of the ring grid [default: 1e-6, ratio: 1e-9]
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Ring spacing: geometric or uniform [default: geometric]
    #[arg(long, value_parser = snake::<Spacing>)]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimFlags {
    /// ODE relative tolerance [default: 1e-8]
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// ODE absolute tolerance [default: 1e-12]
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Rings inside this radius join the origin [default: 1e-9]
    #[arg(long)]
    pub absorb_radius: Option<f64>,
    /// Neighbours closer than this merge [default: 0]
    #[arg(long)]
    pub merge_gap: Option<f64>,
    /// Largest ODE step [default: 0.05]
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Snapshot interval [default: 0.01]
    #[arg(long)]
    pub record_every: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelFlags,
    /// Ratios ρ ≥ 0, comma separated [default: 1]
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub rho: Option<Vec<f64>>,
    /// Also estimate ψ by Monte Carlo with this many samples (at least 1000)
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimFlags,
    /// Final time [default: 0.2]
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct SimilarityArgs {
    /// Dimension, at least 2 [default: 2]
    #[arg(long)]
    pub d: Option<usize>,
    /// Inner ring radius [default: 1]
    #[arg(long)]
    pub rho1: Option<f64>,
    /// Outer ring radius [default: 2]
    #[arg(long)]
    pub rho2: Option<f64>,
    /// Inner ring mass for the witness [default: 0.5]
    #[arg(long)]
    pub m1: Option<f64>,
    /// Outer ring mass for the witness [default: 0.5]
    #[arg(long)]
    pub m2: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimFlags,
    /// Initial radii to track, comma separated [default: 10^-1, 10^-1.5, 10^-2, 10^-2.5]
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub r0: Option<Vec<f64>>,
    /// Censoring cap as a multiple of the predicted collapse time [default: 10]
    #[arg(long)]
    pub cap_factor: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RatioArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimFlags,
    /// Time at which the curve is taken [default: 0.05]
    #[arg(long)]
    pub time: Option<f64>,
}

/// Union of every setting; a `--config` file holds a subset of these keys.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub d: Option<usize>,
    pub alpha: Option<f64>,
    pub rho: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub data: Option<InitialKind>,
    pub k: Option<f64>,
    pub epsilon: Option<f64>,
    pub rings: Option<usize>,
    pub r_min: Option<f64>,
    pub spacing: Option<Spacing>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub absorb_radius: Option<f64>,
    pub merge_gap: Option<f64>,
    pub max_step: Option<f64>,
    pub record_every: Option<f64>,
    pub t_end: Option<f64>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub r0: Option<Vec<f64>>,
    pub cap_factor: Option<f64>,
    pub time: Option<f64>,
}

impl Settings {
    /// Config file first, then every flag that was given.
    pub fn resolve(cli: &Cli) -> anyhow::Result<Self> {
        let mut merged = match &cli.config {
            Some(path) => read_config(path)?,
            None => serde_json::Map::new(),
        };
        let command = cli.command.name();
        match merged.remove("command") {
            None => {}
            Some(Value::String(named)) if named == command => {}
            Some(other) => bail!("config command is {other} but {command:?} was invoked"),
        }
        for flags in [serde_json::to_value(&cli.run)?, cli.command.flags()?] {
            if let Value::Object(map) = flags {
                merged.extend(map.into_iter().filter(|(_, v)| !v.is_null()));
            }
        }
        serde_json::from_value(Value::Object(merged)).context("invalid settings")
    }
}

fn read_config(path: &Path) -> anyhow::Result<serde_json::Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("config {} is not valid JSON", path.display()))? {
        Value::Object(map) => Ok(map),
        _ => bail!("config {} must hold a JSON object", path.display()),
    }
}

fn snake<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_owned())).map_err(|e| e.to_string())
}
