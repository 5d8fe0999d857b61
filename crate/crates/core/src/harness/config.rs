//! Experiment configuration, read from TOML.
//!
//! | key                | type              | default            |
//! |--------------------|-------------------|--------------------|
//! | `env`              | string            | `"cart_pole"`      |
//! | `window_episodes`  | int ≥ 1           | 10                 |
//! | `total_windows`    | int ≥ 1           | 100                |
//! | `n_runs`           | int ≥ 1           | 20                 |
//! | `master_seed`      | int               | 2018               |
//! | `strategies`       | list of strings   | all seven          |
//! | `oracle_arm`       | int or "calibrate"| `"calibrate"`      |
//! | `worst_arm`        | int or "calibrate"| `"calibrate"`      |
//! | `arm_mean_returns` | list of floats    | absent             |
//! | `output_dir`       | path              | `"out"`            |
//! | `[surrogate]`      | `eta`, `ma_window`, `clip` | 0.5, 10, true |
//! | `[bandit]`         | `epsilon`, `tau`, `ucb_c`, `exp3_gamma` | 0.1, 0.1, 1, 0.1 |
//! | `[dynamics]`       | see [`DynamicsConfig`] |               |
//! | `[[arms]]`         | one table per [`AgentConfig`] | shipped pool |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::bandit::{BanditParams, StrategyName};
use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::surrogate::SurrogateConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub hidden_layers: Vec<usize>,
    pub prior_std: f64,
    pub obs_std: f64,
    /// Initial step size; step `t` of an arm's model uses
    /// `learning_rate · (1 + t / lr_decay_steps)^(−lr_decay_power)`.
    pub learning_rate: f64,
    pub lr_decay_steps: f64,
    pub lr_decay_power: f64,
    /// Gradient steps after every episode.
    pub train_steps: usize,
    pub batch_size: usize,
}

impl DynamicsConfig {
    pub fn step_size(&self, t: u64) -> f64 {
        self.learning_rate * (1.0 + t as f64 / self.lr_decay_steps).powf(-self.lr_decay_power)
    }
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            hidden_layers: vec![16],
            prior_std: 0.5,
            obs_std: 0.1,
            learning_rate: 1e-5,
            lr_decay_steps: 100.0,
            lr_decay_power: 0.6,
            train_steps: 10,
            batch_size: 32,
        }
    }
}

/// An arm index, or a request to determine it by calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ArmChoiceRepr", into = "ArmChoiceRepr")]
pub enum ArmChoice {
    Calibrate,
    Arm(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ArmChoiceRepr {
    Index(usize),
    Word(String),
}

impl TryFrom<ArmChoiceRepr> for ArmChoice {
    type Error = String;

    fn try_from(r: ArmChoiceRepr) -> std::result::Result<Self, String> {
        match r {
            ArmChoiceRepr::Index(i) => Ok(ArmChoice::Arm(i)),
            ArmChoiceRepr::Word(w) if w == "calibrate" => Ok(ArmChoice::Calibrate),
            ArmChoiceRepr::Word(w) => Err(format!("expected an arm index or \"calibrate\", got `{w}`")),
        }
    }
}

impl From<ArmChoice> for ArmChoiceRepr {
    fn from(c: ArmChoice) -> Self {
        match c {
            ArmChoice::Calibrate => ArmChoiceRepr::Word("calibrate".into()),
            ArmChoice::Arm(i) => ArmChoiceRepr::Index(i),
        }
    }
}

impl Serialize for StrategyName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StrategyName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        StrategyName::from_str(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub window_episodes: usize,
    pub total_windows: usize,
    pub n_runs: usize,
    pub master_seed: u64,
    pub strategies: Vec<StrategyName>,
    pub oracle_arm: ArmChoice,
    pub worst_arm: ArmChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arm_mean_returns: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub surrogate: SurrogateConfig,
    pub bandit: BanditParams,
    pub dynamics: DynamicsConfig,
    pub arms: Vec<AgentConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::CartPole,
            window_episodes: 10,
            total_windows: 100,
            n_runs: 20,
            master_seed: 2018,
            strategies: vec![
                StrategyName::EpsilonGreedy,
                StrategyName::Softmax,
                StrategyName::Ucb1,
                StrategyName::Exp3,
                StrategyName::Uniform,
                StrategyName::Best,
                StrategyName::Worst,
            ],
            oracle_arm: ArmChoice::Calibrate,
            worst_arm: ArmChoice::Calibrate,
            arm_mean_returns: None,
            output_dir: PathBuf::from("out"),
            surrogate: SurrogateConfig::default(),
            bandit: BanditParams::default(),
            dynamics: DynamicsConfig::default(),
            arms: AgentConfig::default_pool(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.arms.is_empty() {
            return fail("at least one arm is required".into());
        }
        if self.window_episodes == 0 || self.total_windows == 0 || self.n_runs == 0 {
            return fail("window_episodes, total_windows and n_runs must be positive".into());
        }
        self.surrogate.validate()?;
        for a in &self.arms {
            a.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let k = self.arms.len();
        for choice in [self.oracle_arm, self.worst_arm] {
            if let ArmChoice::Arm(i) = choice {
                if i >= k {
                    return fail(format!("arm index {i} out of range for {k} arms"));
                }
            }
        }
        for s in &self.strategies {
            if let StrategyName::Fixed(i) = s {
                if *i >= k {
                    return fail(format!("strategy fixed{i} out of range for {k} arms"));
                }
            }
        }
        if let Some(m) = &self.arm_mean_returns {
            if m.len() != k {
                return fail(format!("arm_mean_returns has {} entries for {k} arms", m.len()));
            }
        }
        let d = &self.dynamics;
        if !(d.prior_std > 0.0 && d.obs_std > 0.0 && d.learning_rate >= 0.0 && d.lr_decay_steps > 0.0)
            || !(d.lr_decay_power >= 0.0)
            || d.batch_size == 0
        {
            return fail("dynamics: prior_std, obs_std, lr_decay_steps, batch_size must be positive".into());
        }
        let mut labels: Vec<&str> = self.arms.iter().map(|a| a.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != k {
            return fail("arm labels must be unique".into());
        }
        if self.arms.iter().any(|a| a.label.contains([',', '"', '\n'])) {
            return fail("arm labels may not contain commas, quotes or newlines".into());
        }
        Ok(())
    }

    /// Parses a comma-separated strategy list as given on the command line.
    pub fn parse_strategies(list: &str) -> Result<Vec<StrategyName>> {
        list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
    }

    pub fn arm_labels(&self) -> Vec<String> {
        self.arms.iter().map(|a| a.label.clone()).collect()
    }
}

impl fmt::Display for ArmChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArmChoice::Calibrate => f.write_str("calibrate"),
            ArmChoice::Arm(i) => write!(f, "{i}"),
        }
    }
}
