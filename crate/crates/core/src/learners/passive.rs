use super::{ask, fit, ExpertOracle, LearnedPolicy, Learner, LearnerConfig, StepOutcome};
use crate::error::Result;
use crate::mdp::{EnvSpec, Environment};
use crate::policy::{Dataset, LinearPolicy};
use crate::rng::RngStream;

/// Follows the expert's own trajectories, querying every visited state.
pub struct Passive<S> {
    config: LearnerConfig,
    feature_map: String,
    horizon: usize,
    data: Dataset,
    policy: LinearPolicy,
    /// Next state to query and its zero-based step within the episode.
    cursor: Option<(S, usize)>,
}

impl<S> Passive<S> {
    pub fn new(spec: EnvSpec, config: LearnerConfig, feature_map: String) -> Self {
        Self {
            policy: LinearPolicy::zeros(spec.num_actions, spec.state_dim, feature_map.clone()),
            data: Dataset::new(spec.num_actions, spec.state_dim),
            horizon: spec.horizon,
            config,
            feature_map,
            cursor: None,
        }
    }
}

impl<E: Environment> Learner<E> for Passive<E::State> {
    fn name(&self) -> &str {
        "passive"
    }

    fn step(
        &mut self,
        env: &E,
        oracle: &mut ExpertOracle<'_, E::State>,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let (state, t) = match self.cursor.take() {
            Some(c) => c,
            None => (env.initial_state(rng), 0),
        };
        let action = ask(oracle, &mut self.data, &state, env.featurize(&state))?;
        if t + 1 < self.horizon {
            self.cursor = Some((env.step(&state, action, rng), t + 1));
        }
        self.policy = fit(&self.data, &self.config.train, &self.feature_map)?;
        Ok(StepOutcome::Queried)
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
