use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dimensions::{DimensionConfig, ScoringConfig};
use crate::elrm::MetricConfig;
use crate::judge::JudgeSettings;
use crate::ngram::NgramConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(format!("unknown format {s:?} (expected table, json or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    /// Worker threads for evaluation; unset means one per core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    /// Records evaluated between writes to the records file.
    pub chunk_size: usize,
    pub format: OutputFormat,
    /// Model name for generations given inline in the dataset.
    pub inline_model: String,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings { parallelism: None, chunk_size: 256, format: OutputFormat::Table, inline_model: "inline".into() }
    }
}

/// Everything a run depends on. Reports embed it so results can be traced
/// back to their settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricConfig,
    pub ngram: NgramConfig,
    pub dimensions: DimensionConfig,
    pub judge: JudgeSettings,
    pub run: RunSettings,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: String| ConfigError::Invalid(e);
        self.metric.validate().map_err(|e| invalid(e.to_string()))?;
        self.ngram.validate().map_err(|e| invalid(e.to_string()))?;
        self.dimensions.validate().map_err(invalid)?;
        self.judge.validate().map_err(invalid)?;
        if self.run.parallelism == Some(0) {
            return Err(invalid("run.parallelism must be at least 1".into()));
        }
        if self.run.chunk_size == 0 {
            return Err(invalid("run.chunk_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn scoring(&self) -> ScoringConfig {
        ScoringConfig { metric: self.metric.clone(), ngram: self.ngram.clone(), dimensions: self.dimensions.clone() }
    }

    /// The settings that can change results; execution details such as
    /// the thread count are left out.
    pub fn provenance(&self) -> RunConfig {
        let mut c = self.clone();
        c.run.parallelism = None;
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngram::Smoothing;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.ngram.smoothing = Smoothing::AddOne;
        c.dimensions.threshold = 40.0;
        c.run.parallelism = Some(3);
        assert_eq!(RunConfig::from_toml_str(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_sections_and_validation() {
        let c = RunConfig::from_toml_str("[metric.weights]\nalpha = 0.25\nbeta = 0.25\nlambda = 0.25\nmu = 0.25\n").unwrap();
        assert_eq!(c.metric.weights.mu, 0.25);
        let smoothing = RunConfig::from_toml_str("[ngram.smoothing]\nscheme = \"epsilon\"\nepsilon = 0.5\n").unwrap();
        assert_eq!(smoothing.ngram.smoothing, Smoothing::Epsilon { epsilon: 0.5 });
        assert!(matches!(RunConfig::from_toml_str("[metric.weights]\nalpha = 0.5\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_toml_str("[nope]\n"), Err(ConfigError::Parse(_))));
        assert!(RunConfig::from_toml_str("[run]\nparallelism = 0\n").is_err());
    }

    #[test]
    fn provenance_drops_thread_count() {
        let mut c = RunConfig::default();
        c.run.parallelism = Some(8);
        assert!(!c.provenance().to_toml().contains("parallelism"));
    }
}
