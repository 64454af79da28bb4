use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use cellsched::algorithms::SolveOptions;
use cellsched::netgen::{GenConfig, Layout};

use crate::{CliError, CliResult};

/// Optional TOML file. Flags given on the command line win.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub generator: GenConfig,
    pub solver: SolveOptions,
    pub sweep: SweepDefaults,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepDefaults {
    pub algos: Option<Vec<String>>,
    #[serde(rename = "T")]
    pub deadlines: Option<Vec<f64>>,
    /// Integers or `"neighbor"` / `"full"`, as strings or numbers.
    #[serde(rename = "M")]
    pub m: Option<Vec<toml::Value>>,
    pub instances: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        let cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }
}

/// Network generator flags shared by every subcommand that builds instances.
#[derive(Args, Debug, Clone)]
pub struct NetArgs {
    /// TOML file with `[generator]`, `[solver]` and `[sweep]` tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// hex7, hex19 or single.
    #[arg(long)]
    pub layout: Option<String>,
    /// Hexagon center-to-vertex distance, meters.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Users per cell.
    #[arg(long)]
    pub users: Option<usize>,
    /// Demand per user, bits.
    #[arg(long)]
    pub demand: Option<f64>,
}

impl NetArgs {
    pub fn apply(&self, mut cfg: GenConfig) -> CliResult<GenConfig> {
        if let Some(l) = &self.layout {
            cfg.layout = Layout::parse(l)?;
        }
        if let Some(r) = self.radius {
            cfg.cell_radius_m = r;
        }
        if let Some(u) = self.users {
            cfg.users_per_cell = u;
        }
        if let Some(d) = self.demand {
            cfg.demand_bits = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn m_value_to_string(v: &toml::Value) -> CliResult<String> {
    match v {
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::String(s) => Ok(s.clone()),
        other => Err(CliError::Config(format!("invalid M entry {other}"))),
    }
}
