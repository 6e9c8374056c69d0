use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{EnvHandle, EnvParams};
use crate::error::{Error, Result};
use crate::learners::{needs_uniform_sampler, LearnerConfig, LEARNER_NAMES};

/// One experiment: every listed learner, `trials` times, on one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub env: String,
    pub learners: Vec<String>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Queries between evaluations of the current policy.
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default)]
    pub env_params: EnvParams,
    #[serde(default)]
    pub learner: LearnerConfig,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_budget() -> usize {
    150
}
fn default_trials() -> usize {
    10
}
fn default_eval_every() -> usize {
    5
}
fn default_eval_episodes() -> usize {
    30
}

impl ExperimentConfig {
    /// Desk-scale defaults for `env` with the given learners.
    pub fn desk(env: &str, learners: &[&str]) -> Self {
        Self {
            name: default_name(),
            env: env.into(),
            learners: learners.iter().map(|s| s.to_string()).collect(),
            budget: default_budget(),
            trials: default_trials(),
            seed: 0,
            eval_every: default_eval_every(),
            eval_episodes: default_eval_episodes(),
            env_params: EnvParams::default(),
            learner: LearnerConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Check everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.budget < 1 {
            return bad("budget must be at least 1".into());
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.eval_every < 1 {
            return bad("eval_every must be at least 1".into());
        }
        if self.eval_episodes < 1 {
            return bad("eval_episodes must be at least 1".into());
        }
        if self.learners.is_empty() {
            return bad("no learners listed".into());
        }
        self.learner.validate()?;
        let env = EnvHandle::build(&self.env, &self.env_params)?;
        for name in &self.learners {
            if !LEARNER_NAMES.contains(&name.as_str()) {
                return bad(format!(
                    "unknown learner {name:?}; expected one of {}",
                    LEARNER_NAMES.join(", ")
                ));
            }
            if needs_uniform_sampler(name) && !env.has_uniform_sampler() {
                return Err(Error::Unsupported(format!(
                    "{name} needs a uniform state sampler, which {} does not define",
                    self.env
                )));
            }
        }
        Ok(())
    }

    /// Query counts at which the policy is evaluated: 0, every `eval_every`, and the budget.
    pub fn eval_points(&self) -> Vec<usize> {
        let mut points: Vec<usize> = (0..=self.budget).step_by(self.eval_every).collect();
        if points.last() != Some(&self.budget) {
            points.push(self.budget);
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_toml() {
        let c = ExperimentConfig::from_toml("env = \"cartpole\"\nlearners = [\"rail-dw\"]\n").unwrap();
        assert_eq!(c.budget, 150);
        assert_eq!(c.trials, 10);
        assert_eq!(c.learner.k, 5);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "env = \"cartpole\"\nlearners = [\"dagger\"]\n",
            "env = \"nowhere\"\nlearners = [\"rail-dw\"]\n",
            "env = \"cartpole\"\nlearners = [\"rail-dw\"]\nbudget = 0\n",
            "env = \"cartpole\"\nlearners = [\"rail-dw\"]\ntypo = 1\n",
            "env = \"cartpole\"\nlearners = []\n",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn eval_points_include_budget() {
        let mut c = ExperimentConfig::desk("cartpole", &["passive"]);
        c.budget = 12;
        assert_eq!(c.eval_points(), vec![0, 5, 10, 12]);
        c.budget = 1;
        assert_eq!(c.eval_points(), vec![0, 1]);
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::desk("seqlabel-L2", &["rail-dw", "passive"]);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
