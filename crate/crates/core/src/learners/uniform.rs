use super::{ask, fit, ExpertOracle, LearnedPolicy, Learner, LearnerConfig, StepOutcome};
use crate::error::{Error, Result};
use crate::mdp::{EnvSpec, Environment, StateVec};
use crate::policy::{committee_or_cold, Committee, Dataset, LinearPolicy};
use crate::rng::RngStream;
use crate::select::Selector;

/// Treats states as i.i.d. uniform over the state space: each query draws a
/// fresh uniform pool and picks from it with `selector`.
pub struct UniformPool {
    name: String,
    selector: Selector,
    config: LearnerConfig,
    feature_map: String,
    data: Dataset,
    policy: LinearPolicy,
}

impl UniformPool {
    pub fn new(name: &str, selector: Selector, spec: EnvSpec, config: LearnerConfig, feature_map: String) -> Self {
        Self {
            name: name.into(),
            selector,
            policy: LinearPolicy::zeros(spec.num_actions, spec.state_dim, feature_map.clone()),
            data: Dataset::new(spec.num_actions, spec.state_dim),
            config,
            feature_map,
        }
    }
}

impl<E: Environment> Learner<E> for UniformPool {
    fn name(&self) -> &str {
        &self.name
    }

    fn step(
        &mut self,
        env: &E,
        oracle: &mut ExpertOracle<'_, E::State>,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let mut states = Vec::with_capacity(self.config.uniform_pool_size);
        for _ in 0..self.config.uniform_pool_size {
            let s = env
                .uniform_state(rng)
                .ok_or_else(|| Error::Unsupported("environment has no uniform state sampler".into()))?;
            states.push(s);
        }
        let pool: Vec<StateVec> = states.iter().map(|s| env.featurize(s)).collect();
        let committee = if self.selector.needs_committee() {
            committee_or_cold(&self.data, self.config.k, &self.config.train, &self.feature_map, rng)?
        } else {
            Committee::new(vec![self.policy.clone()])?
        };
        let i = self.selector.select(&pool, &committee, &self.config.binning, rng)?;
        ask(oracle, &mut self.data, &states[i], pool[i].clone())?;
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
