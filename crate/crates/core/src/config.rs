//! Simulation configuration: a TOML file, optionally patched by
//! `dotted.key=value` overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csi::AgingSection;
use crate::error::{Error, Result};
use crate::experiment::SweepSection;
use crate::scenario::ScenarioConfig;
use crate::scheduling::{BlockContext, SchedulerConfig, TrainingSection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Master seed; every realization seed is derived from it.
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub aging: AgingSection,
    pub training: TrainingSection,
    pub scheduler: SchedulerConfig,
    pub sweep: SweepSection,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            scenario: ScenarioConfig::default(),
            aging: AgingSection::default(),
            training: TrainingSection::default(),
            scheduler: SchedulerConfig::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.aging
            .to_config(self.scenario.wavelength)
            .map_err(|e| Error::Config(e.to_string()))?;
        self.training.validate()?;
        self.scheduler.validate()?;
        self.sweep.validate()
    }

    /// Reads `path`, applies `overrides` and validates the result.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, overrides).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: SimConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Same configuration with the variant overrides applied on top.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_toml(&text, overrides)
    }

    pub fn block_context(&self, snr_db: f64) -> BlockContext {
        BlockContext {
            total_power: self.scenario.transmit_power,
            noise_power: self.scenario.noise_power_at(snr_db),
            training: self.training,
            scheduler: self.scheduler.clone(),
        }
    }
}

/// Parses the right-hand side as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies one `a.b.c=value` override. Intermediate tables are created on
/// demand; unknown keys surface when the table is deserialized.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {spec:?} is not of the form key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key {key:?} is malformed")));
    }
    let (last, sections) = parts.split_last().expect("split yields at least one part");
    let mut cursor = table;
    for section in sections {
        let entry = cursor
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override key {key:?}: {section} is not a table")))?;
    }
    cursor.insert(last.to_string(), parse_value(raw));
    Ok(())
}
