//! The idealized reductions: forward training and RAIL proper. Each round
//! runs an i.i.d. active learner on a fixed pool drawn from one reference
//! distribution and labels it from scratch.

use super::{ask, fit, ExpertOracle, LearnedPolicy, Learner, LearnerConfig, NonStationaryPolicy, StepOutcome};
use crate::error::{Error, Result};
use crate::mdp::{rollout, sample_d_t, EnvSpec, Environment, StateVec};
use crate::policy::{committee_or_cold, Committee, Dataset, LinearPolicy};
use crate::rng::RngStream;
use crate::select::Selector;

/// One round of pool-based active learning. Queried states leave the pool.
pub struct ActiveRound<S> {
    states: Vec<S>,
    pool: Vec<StateVec>,
    data: Dataset,
    budget: usize,
    selector: Selector,
}

impl<S> ActiveRound<S> {
    pub fn new(states: Vec<S>, pool: Vec<StateVec>, spec: EnvSpec, budget: usize, selector: Selector) -> Self {
        Self {
            states,
            pool,
            data: Dataset::new(spec.num_actions, spec.state_dim),
            budget,
            selector,
        }
    }

    pub fn is_done(&self) -> bool {
        self.data.len() >= self.budget
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Replace an exhausted pool with fresh draws from the same distribution.
    pub fn refill(&mut self, states: Vec<S>, pool: Vec<StateVec>) {
        self.states = states;
        self.pool = pool;
    }

    /// Select and label one pool state; returns its features and label.
    pub fn step(
        &mut self,
        oracle: &mut ExpertOracle<'_, S>,
        config: &LearnerConfig,
        feature_map: &str,
        rng: &mut RngStream,
    ) -> Result<(StateVec, usize)> {
        let committee = if self.selector.needs_committee() {
            committee_or_cold(&self.data, config.k, &config.train, feature_map, rng)?
        } else {
            Committee::cold(1, self.data.num_actions(), self.data.feature_dim(), feature_map)?
        };
        let i = self.selector.select(&self.pool, &committee, &config.binning, rng)?;
        let state = self.states.remove(i);
        let x = self.pool.remove(i);
        let a = ask(oracle, &mut self.data, &state, x.clone())?;
        Ok((x, a))
    }
}

/// What one round saw and produced, for the bound checks.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Zero-based round index.
    pub round: usize,
    /// Policy whose state distribution supplied the round's pool.
    pub reference: LearnedPolicy,
    pub learned: LinearPolicy,
    pub queries: usize,
}

fn featurize_all<E: Environment>(env: &E, states: &[E::State]) -> Vec<StateVec> {
    states.iter().map(|s| env.featurize(s)).collect()
}

/// Active forward training: round `t` learns the step-`t` policy from states
/// at time `t` under the already-trained steps `1..t-1`.
pub struct ForwardActive<S> {
    config: LearnerConfig,
    feature_map: String,
    spec: EnvSpec,
    per_round: usize,
    steps: Vec<LinearPolicy>,
    round: Option<ActiveRound<S>>,
    records: Vec<IterationRecord>,
    all: Dataset,
}

impl<S> ForwardActive<S> {
    pub fn new(
        spec: EnvSpec,
        config: LearnerConfig,
        rounds: usize,
        per_round: usize,
        feature_map: String,
    ) -> Result<Self> {
        if rounds != spec.horizon {
            return Err(Error::Config(format!(
                "forward training learns one policy per step: rounds ({rounds}) must equal the horizon ({})",
                spec.horizon
            )));
        }
        Ok(Self {
            steps: vec![LinearPolicy::zeros(spec.num_actions, spec.state_dim, feature_map.clone()); spec.horizon],
            all: Dataset::new(spec.num_actions, spec.state_dim),
            config,
            feature_map,
            spec,
            per_round,
            round: None,
            records: Vec::new(),
        })
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn is_finished(&self) -> bool {
        self.records.len() == self.spec.horizon
    }

    pub fn nonstationary(&self) -> NonStationaryPolicy {
        NonStationaryPolicy::new(self.steps.clone()).expect("horizon >= 1")
    }

    fn draw_pool<E: Environment<State = S>>(&self, env: &E, rng: &mut RngStream) -> Result<(Vec<S>, Vec<StateVec>)> {
        let t = self.records.len();
        let partial = LearnedPolicy::NonStationary(self.nonstationary());
        let n = self.config.pool_episodes * self.spec.horizon;
        let states = sample_d_t(env, &partial.on(env), t + 1, n, rng)?;
        let pool = featurize_all(env, &states);
        Ok((states, pool))
    }
}

impl<E: Environment> Learner<E> for ForwardActive<E::State> {
    fn name(&self) -> &str {
        "forward-active"
    }

    fn step(
        &mut self,
        env: &E,
        oracle: &mut ExpertOracle<'_, E::State>,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        if self.is_finished() {
            return Ok(StepOutcome::Stopped);
        }
        if self.round.as_ref().is_none_or(|r| r.pool_len() == 0) {
            let (states, pool) = self.draw_pool(env, rng)?;
            match self.round.as_mut() {
                Some(r) => r.refill(states, pool),
                None => {
                    self.round =
                        Some(ActiveRound::new(states, pool, self.spec, self.per_round, self.config.round_selector))
                }
            }
        }
        let round = self.round.as_mut().expect("round initialized above");
        let (x, a) = round.step(oracle, &self.config, &self.feature_map, rng)?;
        self.all.push(x, a)?;
        if round.is_done() {
            let round = self.round.take().expect("round initialized above");
            let t = self.records.len();
            let learned = fit(round.data(), &self.config.train, &self.feature_map)?;
            let reference = LearnedPolicy::NonStationary(self.nonstationary());
            self.steps[t] = learned.clone();
            self.records.push(IterationRecord {
                round: t,
                reference,
                learned,
                queries: round.data().len(),
            });
        }
        Ok(StepOutcome::Queried)
    }

    fn queries_used(&self) -> usize {
        self.all.len()
    }

    fn policy(&self) -> LearnedPolicy {
        LearnedPolicy::NonStationary(self.nonstationary())
    }

    fn queried(&self) -> &Dataset {
        &self.all
    }
}

/// Idealized RAIL: round `t` actively learns a stationary policy on the state
/// distribution of the previous round's policy. No data is shared between rounds.
pub struct RailIdealized<S> {
    config: LearnerConfig,
    feature_map: String,
    spec: EnvSpec,
    rounds: usize,
    per_round: usize,
    current: LinearPolicy,
    round: Option<ActiveRound<S>>,
    records: Vec<IterationRecord>,
    all: Dataset,
}

impl<S> RailIdealized<S> {
    /// `initial` is the arbitrary starting policy; `None` means all-zero weights.
    pub fn new(
        spec: EnvSpec,
        config: LearnerConfig,
        rounds: usize,
        per_round: usize,
        initial: Option<LinearPolicy>,
        feature_map: String,
    ) -> Self {
        Self {
            current: initial
                .unwrap_or_else(|| LinearPolicy::zeros(spec.num_actions, spec.state_dim, feature_map.clone())),
            all: Dataset::new(spec.num_actions, spec.state_dim),
            config,
            feature_map,
            spec,
            rounds,
            per_round,
            round: None,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn is_finished(&self) -> bool {
        self.records.len() == self.rounds
    }

    pub fn current(&self) -> &LinearPolicy {
        &self.current
    }

    fn draw_pool<E: Environment<State = S>>(&self, env: &E, rng: &mut RngStream) -> Result<(Vec<S>, Vec<StateVec>)> {
        let mut states = Vec::with_capacity(self.config.pool_episodes * self.spec.horizon);
        for _ in 0..self.config.pool_episodes {
            let mut r = rng.fork();
            states.extend(rollout(env, &self.current.on(env), self.spec.horizon, &mut r)?.into_states());
        }
        let pool = featurize_all(env, &states);
        Ok((states, pool))
    }
}

impl<E: Environment> Learner<E> for RailIdealized<E::State> {
    fn name(&self) -> &str {
        "rail"
    }

    fn step(
        &mut self,
        env: &E,
        oracle: &mut ExpertOracle<'_, E::State>,
        rng: &mut RngStream,
    ) -> Result<StepOutcome> {
        if self.is_finished() {
            return Ok(StepOutcome::Stopped);
        }
        if self.round.as_ref().is_none_or(|r| r.pool_len() == 0) {
            let (states, pool) = self.draw_pool(env, rng)?;
            match self.round.as_mut() {
                Some(r) => r.refill(states, pool),
                None => {
                    self.round =
                        Some(ActiveRound::new(states, pool, self.spec, self.per_round, self.config.round_selector))
                }
            }
        }
        let round = self.round.as_mut().expect("round initialized above");
        let (x, a) = round.step(oracle, &self.config, &self.feature_map, rng)?;
        self.all.push(x, a)?;
        if round.is_done() {
            let round = self.round.take().expect("round initialized above");
            let learned = fit(round.data(), &self.config.train, &self.feature_map)?;
            self.records.push(IterationRecord {
                round: self.records.len(),
                reference: LearnedPolicy::Stationary(self.current.clone()),
                learned: learned.clone(),
                queries: round.data().len(),
            });
            self.current = learned;
        }
        Ok(StepOutcome::Queried)
    }

    fn queries_used(&self) -> usize {
        self.all.len()
    }

    fn policy(&self) -> LearnedPolicy {
        LearnedPolicy::Stationary(self.current.clone())
    }

    fn queried(&self) -> &Dataset {
        &self.all
    }
}

/// Drive a learner until it stops or has used `budget` queries.
pub fn run_to_budget<E: Environment>(
    learner: &mut dyn Learner<E>,
    env: &E,
    oracle: &mut ExpertOracle<'_, E::State>,
    budget: usize,
    rng: &mut RngStream,
) -> Result<()> {
    while learner.queries_used() < budget {
        if learner.step(env, oracle, rng)? == StepOutcome::Stopped {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::DiscreteMdp;

    #[test]
    fn forward_single_step_pool_comes_from_initial_distribution() {
        let mdp = DiscreteMdp::chain(3).unwrap().with_horizon(1).unwrap();
        let config = LearnerConfig {
            pool_episodes: 4,
            ..LearnerConfig::default()
        };
        let mut fwd = ForwardActive::new(mdp.spec(), config, 1, 1, "f".into()).unwrap();
        let mut seen = Vec::new();
        let mut oracle = ExpertOracle::fallible(|s: &usize| {
            seen.push(*s);
            Ok(1)
        });
        let mut rng = RngStream::new(0, 0);
        assert_eq!(fwd.step(&mdp, &mut oracle, &mut rng).unwrap(), StepOutcome::Queried);
        assert_eq!(fwd.step(&mdp, &mut oracle, &mut rng).unwrap(), StepOutcome::Stopped);
        drop(oracle);
        assert_eq!(seen, vec![0]);
    }

    #[test]
    fn forward_rounds_must_match_horizon() {
        let mdp = DiscreteMdp::chain(3).unwrap();
        assert!(ForwardActive::<usize>::new(mdp.spec(), LearnerConfig::default(), 2, 1, "f".into()).is_err());
    }

    #[test]
    fn budget_accounting() {
        let mdp = DiscreteMdp::chain(3).unwrap();
        let mut fwd = ForwardActive::new(mdp.spec(), LearnerConfig::default(), 3, 2, "f".into()).unwrap();
        let mut oracle = ExpertOracle::new(|_: &usize| 1);
        run_to_budget(&mut fwd, &mdp, &mut oracle, 100, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(oracle.query_count(), 6);
        assert_eq!(fwd.records().len(), 3);

        let mut rail = RailIdealized::new(mdp.spec(), LearnerConfig::default(), 3, 2, None, "f".into());
        let mut oracle = ExpertOracle::new(|_: &usize| 1);
        run_to_budget(&mut rail, &mdp, &mut oracle, 100, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(oracle.query_count(), 6);
        assert_eq!(rail.records().len(), 3);
    }

    #[test]
    fn rail_single_round_uses_initial_policy_distribution() {
        // The zero policy stays in state 0 on the chain, so the only pool state is 0.
        let mdp = DiscreteMdp::chain(3).unwrap();
        let mut rail = RailIdealized::new(mdp.spec(), LearnerConfig::default(), 1, 1, None, "f".into());
        let mut asked = Vec::new();
        let mut oracle = ExpertOracle::fallible(|s: &usize| {
            asked.push(*s);
            Ok(1)
        });
        run_to_budget(&mut rail, &mdp, &mut oracle, 10, &mut RngStream::new(2, 0)).unwrap();
        drop(oracle);
        assert_eq!(asked, vec![0]);
        assert_eq!(rail.records()[0].reference, LearnedPolicy::Stationary(LinearPolicy::zeros(2, 3, "f")));
    }
}
