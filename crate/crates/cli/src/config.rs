//! Scenario and parameter files (TOML, unknown keys rejected).

use std::path::{Path, PathBuf};

use fcr_core::{
    AgcDispatch, AgcRateLimit, CascadeStage, CentralizedConfig, DisturbanceEvent, GridParams, IntradayConfig,
    SimConfig,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub duration: f64,
    #[serde(default = "yes")]
    pub agc_enabled: bool,
    #[serde(default)]
    pub agc_rate_limit: AgcRateLimit,
    #[serde(default)]
    pub agc_dispatch: AgcDispatch,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridParams,
    pub stages: Vec<CascadeStage>,
    pub centralized: CentralizedConfig,
    pub intraday: IntradayConfig,
    #[serde(default)]
    pub disturbances: Vec<DisturbanceEvent>,
    pub sim: SimSection,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

impl ScenarioConfig {
    pub fn to_sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.sim.dt,
            duration: self.sim.duration,
            grid: self.grid,
            stages: self.stages.clone(),
            centralized: self.centralized,
            intraday: self.intraday,
            disturbances: self.disturbances.clone(),
            agc_enabled: self.sim.agc_enabled,
            agc_rate_limit: self.sim.agc_rate_limit,
            agc_dispatch: self.sim.agc_dispatch,
        }
    }
}

/// Parses a TOML document; errors name the offending key path.
pub fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim_end().to_string();
        if path == "." {
            CliError::Config(msg)
        } else {
            CliError::Config(format!("{path}: {msg}"))
        }
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, CliError> {
    parse_toml(&read(path)?).map_err(|e| e.context(&path.display().to_string()))
}

pub fn load_grid_params(path: &Path) -> Result<GridParams, CliError> {
    parse_toml(&read(path)?).map_err(|e| e.context(&path.display().to_string()))
}
