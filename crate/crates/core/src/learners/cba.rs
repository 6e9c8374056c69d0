use serde::{Deserialize, Serialize};

use super::{ask, fit, ExpertOracle, LearnedPolicy, Learner, LearnerConfig, StepOutcome};
use crate::error::{Error, Result};
use crate::mdp::{mean_stderr, EnvSpec, Environment};
use crate::policy::{Dataset, LinearPolicy};
use crate::rng::RngStream;

/// Confidence-based autonomy constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CbaConfig {
    /// Threshold before any query has been asked.
    pub initial_threshold: f64,
    /// After queries, threshold = mean − `std_multiplier` · std of the
    /// confidences recorded at queried states.
    pub std_multiplier: f64,
}

impl Default for CbaConfig {
    fn default() -> Self {
        Self {
            initial_threshold: 0.9,
            std_multiplier: 1.0,
        }
    }
}

impl CbaConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.initial_threshold.is_finite() || !self.std_multiplier.is_finite() {
            return Err(Error::Config("CBA constants must be finite".into()));
        }
        Ok(())
    }
}

/// Runs the current policy and asks for help wherever its confidence (the
/// largest action probability) falls below an adaptive threshold. After a
/// query it executes the expert's answer.
pub struct Cba<S> {
    config: LearnerConfig,
    feature_map: String,
    horizon: usize,
    data: Dataset,
    policy: LinearPolicy,
    threshold: f64,
    confidences: Vec<f64>,
    cursor: Option<(S, usize)>,
    stopped: bool,
}

impl<S> Cba<S> {
    pub fn new(spec: EnvSpec, config: LearnerConfig, feature_map: String) -> Self {
        Self {
            policy: LinearPolicy::zeros(spec.num_actions, spec.state_dim, feature_map.clone()),
            data: Dataset::new(spec.num_actions, spec.state_dim),
            horizon: spec.horizon,
            threshold: config.cba.initial_threshold,
            config,
            feature_map,
            confidences: Vec::new(),
            cursor: None,
            stopped: false,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Confidence at each queried state, in query order.
    pub fn confidences(&self) -> &[f64] {
        &self.confidences
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn set_threshold(&mut self, threshold: f64) {
        self.threshold = threshold;
    }
}

/// Population standard deviation.
fn population_std(xs: &[f64]) -> f64 {
    let (mean, _) = mean_stderr(xs);
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

impl<E: Environment> Learner<E> for Cba<E::State> {
    fn name(&self) -> &str {
        "cba"
    }

    fn step(
        &mut self,
        env: &E,
        oracle: &mut ExpertOracle<'_, E::State>,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        if self.stopped {
            return Ok(StepOutcome::Stopped);
        }
        // Steps taken since the last query; a full episode of them means the
        // learner is confident everywhere it goes.
        let mut quiet = 0;
        loop {
            let (state, t) = match self.cursor.take() {
                Some(c) => c,
                None => (env.initial_state(rng), 0),
            };
            let x = env.featurize(&state);
            let confidence = self.policy.predict_proba(&x).into_iter().fold(f64::MIN, f64::max);
            let action = if confidence < self.threshold {
                let a = ask(oracle, &mut self.data, &state, x.clone())?;
                self.confidences.push(confidence);
                let (mean, _) = mean_stderr(&self.confidences);
                self.threshold = mean - self.config.cba.std_multiplier * population_std(&self.confidences);
                self.policy = fit(&self.data, &self.config.train, &self.feature_map)?;
                Some(a)
            } else {
                None
            };
            let next_action = action.unwrap_or_else(|| self.policy.act(&x));
            if t + 1 < self.horizon {
                self.cursor = Some((env.step(&state, next_action, rng), t + 1));
            }
            if action.is_some() {
                return Ok(StepOutcome::Queried);
            }
            quiet += 1;
            if quiet >= self.horizon {
                self.stopped = true;
                return Ok(StepOutcome::Stopped);
            }
        }
    }

    fn queries_used(&self) -> usize {
        self.data.len()
    }

    fn policy(&self) -> LearnedPolicy {
        LearnedPolicy::Stationary(self.policy.clone())
    }

    fn queried(&self) -> &Dataset {
        &self.data
    }
}
