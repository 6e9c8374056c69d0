use rayon::prelude::*;

use super::{ask, fit, ExpertOracle, LearnedPolicy, Learner, LearnerConfig, StepOutcome};
use crate::error::Result;
use crate::mdp::{rollout, EnvSpec, Environment, StateVec};
use crate::policy::{committee_or_cold, Committee, Dataset, LinearPolicy};
use crate::rng::RngStream;
use crate::select::Selector;

/// Incremental RAIL: one query per iteration, chosen from states visited by
/// a bagged committee trained on all data so far.
///
/// With `Selector::DwQbc` this is RAIL-DW; `Qbc` and `Random` give the
/// variants without density weighting or without disagreement.
pub struct RailDw<S> {
    name: String,
    selector: Selector,
    config: LearnerConfig,
    feature_map: String,
    horizon: usize,
    data: Dataset,
    policy: LinearPolicy,
    last_pool: Vec<S>,
}

impl<S> RailDw<S> {
    pub fn new(name: &str, selector: Selector, spec: EnvSpec, config: LearnerConfig, feature_map: String) -> Self {
        Self {
            name: name.into(),
            selector,
            policy: LinearPolicy::zeros(spec.num_actions, spec.state_dim, feature_map.clone()),
            data: Dataset::new(spec.num_actions, spec.state_dim),
            horizon: spec.horizon,
            config,
            feature_map,
            last_pool: Vec::new(),
        }
    }

    /// States of the pool the latest query was drawn from.
    pub fn last_pool(&self) -> &[S] {
        &self.last_pool
    }
}

/// `episodes` rollouts of each committee member; all visited states, member-major.
pub fn committee_pool<E: Environment>(
    env: &E,
    committee: &Committee,
    episodes: usize,
    horizon: usize,
    rng: &mut RngStream,
) -> Result<Vec<E::State>> {
    let jobs: Vec<(usize, RngStream)> = committee
        .members()
        .iter()
        .enumerate()
        .flat_map(|(m, _)| (0..episodes).map(move |_| m))
        .map(|m| (m, rng.fork()))
        .collect();
    let trajectories = jobs
        .into_par_iter()
        .map(|(m, mut r)| rollout(env, &committee.members()[m].on(env), horizon, &mut r))
        .collect::<Result<Vec<_>>>()?;
    Ok(trajectories.into_iter().flat_map(|t| t.into_states()).collect())
}

impl<E: Environment> Learner<E> for RailDw<E::State> {
    fn name(&self) -> &str {
        &self.name
    }

    fn step(
        &mut self,
        env: &E,
        oracle: &mut ExpertOracle<'_, E::State>,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        let committee = committee_or_cold(&self.data, self.config.k, &self.config.train, &self.feature_map, rng)?;
        let states = committee_pool(env, &committee, self.config.pool_episodes, self.horizon, rng)?;
        let pool: Vec<StateVec> = states.par_iter().map(|s| env.featurize(s)).collect();
        let i = self.selector.select(&pool, &committee, &self.config.binning, rng)?;
        ask(oracle, &mut self.data, &states[i], pool[i].clone())?;
        self.policy = fit(&self.data, &self.config.train, &self.feature_map)?;
        self.last_pool = states;
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
