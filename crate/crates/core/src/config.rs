//! Configuration file schema: a `[train]` / `[features]` / `[model]` section
//! plus one flat `[task.N]` table per task. CLI flags override file values;
//! the fully resolved config is echoed into every run manifest so
//! experiments stay diff-able.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::features::CnnFilterSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingStrategy {
    Uniform,
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayMode {
    /// Multiply the learning rate by `lr_decay_factor` on every dev drop.
    Step,
    /// Milder schedule: multiply by `sqrt(lr_decay_factor)` per drop.
    Anneal,
}

/// All training hyperparameters. The defaults are the published recipe:
/// `alpha_w = 0.5`, `alpha_c = 0.8`, momentum 0.9, dropout 0.5, learning
/// rate decay 1/16 on dev drops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub alpha_w: f64,
    pub alpha_c: f64,
    pub momentum: f64,
    pub dropout: f64,
    pub lr: f64,
    pub lr_decay_factor: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub max_fragment_len: usize,
    pub sampling: SamplingStrategy,
    pub decay_mode: DecayMode,
    pub nesterov: bool,
    /// Span decision threshold used by the decoder.
    pub threshold: f64,
    /// Override for steps per epoch; default is
    /// ceil(total training fragments across tasks / batch_size).
    pub steps_per_epoch: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha_w: 0.5,
            alpha_c: 0.8,
            momentum: 0.9,
            dropout: 0.5,
            lr: 0.128,
            lr_decay_factor: 1.0 / 16.0,
            batch_size: 256,
            max_epochs: 100,
            patience: 5,
            seed: 42,
            max_fragment_len: 7,
            sampling: SamplingStrategy::Proportional,
            decay_mode: DecayMode::Step,
            nesterov: false,
            threshold: 0.5,
            steps_per_epoch: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(self.alpha_w > 0.0 && self.alpha_w < 1.0, "alpha_w must be in (0, 1)")?;
        check(self.alpha_c > 0.0 && self.alpha_c < 1.0, "alpha_c must be in (0, 1)")?;
        check((0.0..1.0).contains(&self.momentum), "momentum must be in [0, 1)")?;
        check((0.0..1.0).contains(&self.dropout), "dropout must be in [0, 1)")?;
        check(self.lr > 0.0, "learning rate must be positive")?;
        check(
            self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0,
            "lr_decay_factor must be in (0, 1]",
        )?;
        check(self.batch_size >= 1, "batch_size must be >= 1")?;
        check(self.max_fragment_len >= 1, "max_fragment_len must be >= 1")?;
        check(
            (0.0..=1.0).contains(&self.threshold),
            "threshold must be in [0, 1]",
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub word_proj_dim: usize,
    pub char_proj_dim: usize,
    pub char_cnn: bool,
    pub char_cnn_filters: Vec<CnnFilterSpec>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            word_proj_dim: 256,
            char_proj_dim: 64,
            char_cnn: false,
            char_cnn_filters: vec![
                CnnFilterSpec { width: 2, count: 16 },
                CnnFilterSpec { width: 3, count: 16 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub shared_layers: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            shared_layers: vec![700, 700],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingsConfig {
    pub cased: Option<PathBuf>,
    pub uncased: Option<PathBuf>,
    #[serde(rename = "format")]
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskFileConfig {
    pub name: String,
    pub main: bool,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub private_layers: Vec<usize>,
    pub sampling_weight: f64,
}

impl Default for TaskFileConfig {
    fn default() -> Self {
        TaskFileConfig {
            name: String::new(),
            main: false,
            train: None,
            dev: None,
            test: None,
            private_layers: Vec::new(),
            sampling_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub train: TrainConfig,
    pub features: FeatureConfig,
    pub model: ModelConfig,
    pub embeddings: EmbeddingsConfig,
    /// Keyed `[task.N]` tables; iteration order is the key order.
    pub task: BTreeMap<String, TaskFileConfig>,
}

impl ConfigFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ConfigFile =
            toml::from_str(s).map_err(|e| Error::Config(format!("bad config file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn tasks_in_order(&self) -> Vec<&TaskFileConfig> {
        self.task.values().collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.task.is_empty() {
            return Err(Error::Config("at least one [task.N] table is required".into()));
        }
        let mains = self.task.values().filter(|t| t.main).count();
        if mains != 1 {
            return Err(Error::Config(format!(
                "exactly one task must be marked main, found {mains}"
            )));
        }
        for (key, t) in &self.task {
            if t.name.is_empty() {
                return Err(Error::Config(format!("task {key} has no name")));
            }
            if t.sampling_weight <= 0.0 {
                return Err(Error::Config(format!(
                    "task {key} has non-positive sampling weight"
                )));
            }
        }
        if self.features.word_proj_dim == 0 || self.features.char_proj_dim == 0 {
            return Err(Error::Config("projection dims must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_recipe() {
        let c = TrainConfig::default();
        assert_eq!(c.alpha_w, 0.5);
        assert_eq!(c.alpha_c, 0.8);
        assert_eq!(c.momentum, 0.9);
        assert_eq!(c.dropout, 0.5);
        assert_eq!(c.lr_decay_factor, 1.0 / 16.0);
    }

    #[test]
    fn parses_task_tables_in_key_order() {
        let cfg = ConfigFile::from_toml_str(
            r#"
            [train]
            lr = 0.064
            [task.1]
            name = "main"
            main = true
            [task.2]
            name = "aux"
            private_layers = [512]
            "#,
        )
        .unwrap();
        let tasks = cfg.tasks_in_order();
        assert_eq!(tasks[0].name, "main");
        assert_eq!(tasks[1].name, "aux");
        assert_eq!(tasks[1].private_layers, vec![512]);
        assert_eq!(cfg.train.lr, 0.064);
        assert_eq!(cfg.train.alpha_w, 0.5);
    }

    #[test]
    fn rejects_zero_or_two_main_tasks() {
        let base = r#"
            [task.1]
            name = "a"
            [task.2]
            name = "b"
        "#;
        assert!(ConfigFile::from_toml_str(base).is_err());
        let two = r#"
            [task.1]
            name = "a"
            main = true
            [task.2]
            name = "b"
            main = true
        "#;
        assert!(ConfigFile::from_toml_str(two).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::from_toml_str("[train]\nlearning_rate = 0.1\n[task.1]\nname='x'\nmain=true").is_err());
    }

    #[test]
    fn roundtrips_through_toml() {
        let mut cfg = ConfigFile::default();
        cfg.task.insert(
            "1".into(),
            TaskFileConfig {
                name: "main".into(),
                main: true,
                ..Default::default()
            },
        );
        let s = cfg.to_toml_string();
        assert_eq!(ConfigFile::from_toml_str(&s).unwrap(), cfg);
    }
}
