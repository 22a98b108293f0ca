use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{RankMode, FEATURE_COUNT};
use crate::geometry::SceneGeometry;
use crate::learners::TrainConfig;
use crate::projection::{AdaptedRuleTable, ScalingMode};
use crate::simulator::{Persona, ScheduleConfig, SensorModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub scaling_mode: ScalingMode,
    pub standardize: bool,
    /// 1-based feature numbers used by the learned methods.
    pub features: Vec<usize>,
    pub rank_mode: RankMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            scaling_mode: ScalingMode::Corrective,
            standardize: true,
            features: (1..=FEATURE_COUNT).collect(),
            rank_mode: RankMode::Greedy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub personas: Vec<String>,
    pub sensors: Vec<String>,
    /// Seeds `base..base + seeds` are run for methods 1 and 2.
    pub seeds: u64,
    /// Leading seeds of each configuration that also train methods 3 and 4.
    pub learned_seeds: u64,
    /// Minimum number of seeds an ordering must hold in.
    pub required_seeds: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            personas: vec!["small".into(), "average".into(), "large".into()],
            sensors: vec!["depthcam".into(), "hmd".into()],
            seeds: 10,
            learned_seeds: 1,
            required_seeds: 8,
        }
    }
}

/// Everything the CLI and suite need, loadable from one TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geometry: SceneGeometry,
    pub adapted_table: AdaptedRuleTable,
    pub schedule: ScheduleConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub suite: SuiteConfig,
    pub personas: Vec<Persona>,
    pub sensors: Vec<SensorModel>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            geometry: SceneGeometry::default(),
            adapted_table: AdaptedRuleTable::standard(),
            schedule: ScheduleConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
            suite: SuiteConfig::default(),
            personas: Persona::presets(),
            sensors: SensorModel::presets(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Built-in defaults when `path` is `None`.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.adapted_table.validate()?;
        self.schedule.validate()?;
        self.train.validate()?;
        for p in &self.personas {
            p.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        for s in &self.sensors {
            s.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.eval.features.is_empty() || self.eval.features.iter().any(|&f| f == 0 || f > FEATURE_COUNT) {
            return Err(Error::Config(format!("features must be numbers in 1..={FEATURE_COUNT}")));
        }
        for name in &self.suite.personas {
            self.persona(name)?;
        }
        for name in &self.suite.sensors {
            self.sensor(name)?;
        }
        Ok(())
    }

    pub fn persona(&self, name: &str) -> Result<&Persona> {
        self.personas
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::Config(format!("unknown persona '{name}'")))
    }

    pub fn sensor(&self, name: &str) -> Result<&SensorModel> {
        self.sensors
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("unknown sensor '{name}'")))
    }

    /// Geometry as seen through the named sensor; the plain scene geometry
    /// when the sensor is not configured.
    pub fn geometry_for(&self, sensor: &str) -> SceneGeometry {
        self.sensor(sensor).map_or_else(|_| self.geometry.clone(), |s| s.effective_geometry(&self.geometry))
    }

    /// 0-based feature subset from the 1-based config numbers.
    pub fn feature_subset(&self) -> Vec<usize> {
        self.eval.features.iter().map(|f| f - 1).collect()
    }
}
