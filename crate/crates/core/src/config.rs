//! TOML pipeline configuration shared by every CLI command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::AugmentationMode;
use crate::eval::CvConfig;
use crate::features::WindowPlan;
use crate::model::GbdtConfig;
use crate::postprocess::{RuleBoostConfig, SmoothingConfig};
use crate::synth::SynthConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    /// Directory of recording CSVs.
    pub data_dir: Option<PathBuf>,
    /// Where commands write their outputs.
    pub output_dir: Option<PathBuf>,
    /// Class names, one per line; defaults to the data directory's
    /// `vocabulary.txt`, then to the 19 WEAR classes.
    pub vocabulary: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mode: AugmentationMode,
    pub seed: u64,
    pub folds: usize,
    pub windows: WindowPlan,
    pub gbdt: GbdtConfig,
    pub smoothing: SmoothingConfig,
    pub rule_boost: RuleBoostConfig,
    pub synth: SynthConfig,
    pub paths: Paths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: AugmentationMode::UlPair,
            seed: 0,
            folds: 3,
            windows: WindowPlan::default(),
            gbdt: GbdtConfig::default(),
            smoothing: SmoothingConfig::default(),
            rule_boost: RuleBoostConfig::default(),
            synth: SynthConfig::default(),
            paths: Paths::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.folds < 2 {
            return invalid(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.windows.sizes_s.is_empty() || !(self.windows.stride_s > 0.0) {
            return invalid("window plan needs sizes and a positive stride".into());
        }
        if let Err(e) = self.gbdt.validate() {
            return invalid(e.to_string());
        }
        if !(self.smoothing.sigma > 0.0) {
            return invalid("smoothing sigma must be positive".into());
        }
        Ok(())
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            folds: self.folds,
            seed: self.seed,
            mode: self.mode,
            plan: self.windows.clone(),
            gbdt: GbdtConfig {
                seed: self.seed,
                ..self.gbdt.clone()
            },
            smoothing: self.smoothing.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg = PipelineConfig::from_toml(
            "mode = \"lr_swap\"\nseed = 4\n[gbdt]\niterations = 20\n[paths]\ndata_dir = \"cohort\"\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, AugmentationMode::LrSwap);
        assert_eq!(cfg.gbdt.iterations, 20);
        assert_eq!(cfg.gbdt.max_depth, 5);
        assert_eq!(cfg.windows, WindowPlan::default());
        assert_eq!(cfg.paths.data_dir.as_deref(), Some(Path::new("cohort")));
        assert_eq!(cfg.cv_config().gbdt.seed, 4);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(PipelineConfig::from_toml("mode = \"rotinv\""), Err(ConfigError::Parse(_))));
        assert!(matches!(PipelineConfig::from_toml("folds = 1"), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            PipelineConfig::from_toml("[gbdt]\nhistogram_bins = 300"),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = PipelineConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
    }
}
