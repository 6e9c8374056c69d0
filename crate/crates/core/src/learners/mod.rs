//! Query strategies. Every learner is a state machine advanced one expert
//! query at a time, so the harness, the HTTP session and the bound checks all
//! drive it the same way.

mod cba;
mod iterative;
mod passive;
mod rail_dw;
mod uniform;

use serde::{Deserialize, Serialize};

pub use cba::{Cba, CbaConfig};
pub use iterative::{run_to_budget, ActiveRound, ForwardActive, IterationRecord, RailIdealized};
pub use passive::Passive;
pub use rail_dw::{committee_pool, RailDw};
pub use uniform::UniformPool;

use crate::error::{contract, Error, Result};
use crate::mdp::{Environment, Policy};
use crate::policy::{train_logistic, Dataset, LinearPolicy, TrainConfig};
use crate::rng::RngStream;
use crate::select::{BinningConfig, Selector};

/// The expert: answers action queries and counts them.
pub struct ExpertOracle<'a, S> {
    answer: Box<dyn FnMut(&S) -> Result<usize> + Send + 'a>,
    query_count: usize,
}

impl<'a, S> ExpertOracle<'a, S> {
    /// Oracle backed by a deterministic policy.
    pub fn new(expert: impl Fn(&S) -> usize + Send + 'a) -> Self {
        Self::fallible(move |s| Ok(expert(s)))
    }

    /// Oracle whose answers may fail, e.g. a human on the other end of a connection.
    pub fn fallible(answer: impl FnMut(&S) -> Result<usize> + Send + 'a) -> Self {
        Self {
            answer: Box::new(answer),
            query_count: 0,
        }
    }

    pub fn query(&mut self, state: &S) -> Result<usize> {
        let a = (self.answer)(state)?;
        self.query_count += 1;
        Ok(a)
    }

    pub fn query_count(&self) -> usize {
        self.query_count
    }
}

/// Non-stationary policy: one linear policy per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct NonStationaryPolicy {
    steps: Vec<LinearPolicy>,
}

impl NonStationaryPolicy {
    pub fn new(steps: Vec<LinearPolicy>) -> Result<Self> {
        if steps.is_empty() {
            return Err(contract("a non-stationary policy needs at least one step"));
        }
        Ok(Self { steps })
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn step(&self, t: usize) -> &LinearPolicy {
        &self.steps[t]
    }

    pub fn steps(&self) -> &[LinearPolicy] {
        &self.steps
    }
}

/// Whatever a learner currently outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnedPolicy {
    Stationary(LinearPolicy),
    NonStationary(NonStationaryPolicy),
}

impl LearnedPolicy {
    /// Action on feature vector `x` at zero-based step `t`.
    pub fn act_features(&self, x: &[f64], t: usize) -> usize {
        match self {
            Self::Stationary(p) => p.act(x),
            Self::NonStationary(p) => p.steps[t.min(p.steps.len() - 1)].act(x),
        }
    }

    pub fn on<'a, E: Environment + ?Sized>(&'a self, env: &'a E) -> OnEnv<'a, E> {
        OnEnv { env, policy: self }
    }

    pub fn as_stationary(&self) -> Option<&LinearPolicy> {
        match self {
            Self::Stationary(p) => Some(p),
            Self::NonStationary(_) => None,
        }
    }
}

/// A learned policy bound to an environment's feature map.
pub struct OnEnv<'a, E: Environment + ?Sized> {
    env: &'a E,
    policy: &'a LearnedPolicy,
}

impl<E: Environment + ?Sized> Policy<E::State> for OnEnv<'_, E> {
    fn act(&self, state: &E::State, t: usize) -> usize {
        self.policy.act_features(&self.env.featurize(state), t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// One query was asked and answered.
    Queried,
    /// The learner will ask nothing more (CBA confident everywhere, or an
    /// iterative learner past its last iteration).
    Stopped,
}

pub trait Learner<E: Environment>: Send {
    fn name(&self) -> &str;

    /// Ask at most one query and update.
    fn step(
        &mut self,
        env: &E,
        oracle: &mut ExpertOracle<'_, E::State>,
        rng: &mut RngStream,
    ) -> Result<StepOutcome>;

    fn queries_used(&self) -> usize;

    fn policy(&self) -> LearnedPolicy;

    /// Every labeled example gathered so far, in query order.
    fn queried(&self) -> &Dataset;
}

/// Hyperparameters shared by the learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    /// Committee size.
    pub k: usize,
    /// Rollouts per committee member (RAIL-DW) or per round (idealized RAIL,
    /// forward training) forming the unlabeled pool.
    pub pool_episodes: usize,
    pub binning: BinningConfig,
    pub train: TrainConfig,
    pub cba: CbaConfig,
    /// Size of the fresh uniform pool drawn by unif-QBC / unif-RAND each query.
    pub uniform_pool_size: usize,
    /// Rounds of idealized RAIL and forward training; `None` means the horizon.
    pub iterations: Option<usize>,
    /// Queries per round; `None` splits the budget evenly over the rounds.
    pub per_iteration_budget: Option<usize>,
    /// Selector used inside each round of idealized RAIL and forward training.
    pub round_selector: Selector,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            k: 5,
            pool_episodes: 1,
            binning: BinningConfig::default(),
            train: TrainConfig::default(),
            cba: CbaConfig::default(),
            uniform_pool_size: 1000,
            iterations: None,
            per_iteration_budget: None,
            round_selector: Selector::DwQbc,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.k < 1 {
            return bad("k must be at least 1");
        }
        if self.pool_episodes < 1 {
            return bad("pool_episodes must be at least 1");
        }
        if self.uniform_pool_size < 1 {
            return bad("uniform_pool_size must be at least 1");
        }
        if self.iterations == Some(0) || self.per_iteration_budget == Some(0) {
            return bad("iterations and per_iteration_budget must be positive");
        }
        self.binning.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.train.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.cba.validate()
    }
}

pub const LEARNER_NAMES: &[&str] = &[
    "passive",
    "unif-qbc",
    "unif-rand",
    "cba",
    "forward-active",
    "rail",
    "rail-dw",
    "rail-qbc",
    "rail-rand",
];

/// Whether `name` needs a uniform state sampler.
pub fn needs_uniform_sampler(name: &str) -> bool {
    name.starts_with("unif-")
}

/// Build a registered learner. `budget` sizes the rounds of the iterative learners.
pub fn build_learner<E: Environment + 'static>(
    name: &str,
    env: &E,
    config: &LearnerConfig,
    budget: usize,
    feature_map: &str,
) -> Result<Box<dyn Learner<E>>> {
    config.validate()?;
    if needs_uniform_sampler(name) && !env.has_uniform_sampler() {
        return Err(Error::Unsupported(format!(
            "{name} needs a uniform state sampler, which this environment does not define"
        )));
    }
    let spec = env.spec();
    let rounds = config.iterations.unwrap_or(spec.horizon);
    let per_round = config.per_iteration_budget.unwrap_or_else(|| (budget / rounds).max(1));
    let fmap = feature_map.to_string();
    Ok(match name {
        "passive" => Box::new(Passive::new(spec, config.clone(), fmap)),
        "unif-qbc" => Box::new(UniformPool::new(name, Selector::Qbc, spec, config.clone(), fmap)),
        "unif-rand" => Box::new(UniformPool::new(name, Selector::Random, spec, config.clone(), fmap)),
        "cba" => Box::new(Cba::new(spec, config.clone(), fmap)),
        "rail-dw" => Box::new(RailDw::new(name, Selector::DwQbc, spec, config.clone(), fmap)),
        "rail-qbc" => Box::new(RailDw::new(name, Selector::Qbc, spec, config.clone(), fmap)),
        "rail-rand" => Box::new(RailDw::new(name, Selector::Random, spec, config.clone(), fmap)),
        "rail" => Box::new(RailIdealized::new(spec, config.clone(), rounds, per_round, None, fmap)),
        "forward-active" => Box::new(ForwardActive::new(spec, config.clone(), rounds, per_round, fmap)?),
        _ => {
            return Err(Error::Config(format!(
                "unknown learner {name:?}; expected one of {}",
                LEARNER_NAMES.join(", ")
            )))
        }
    })
}

/// Query, record, and return the answer. Rejects out-of-range answers.
pub(crate) fn ask<S>(
    oracle: &mut ExpertOracle<'_, S>,
    data: &mut Dataset,
    state: &S,
    features: crate::mdp::StateVec,
) -> Result<usize> {
    let a = oracle.query(state)?;
    data.push(features, a)?;
    Ok(a)
}

/// Retrain on `data`, or the zero policy when it is empty.
pub(crate) fn fit(data: &Dataset, config: &TrainConfig, feature_map: &str) -> Result<LinearPolicy> {
    if data.is_empty() {
        Ok(LinearPolicy::zeros(data.num_actions(), data.feature_dim(), feature_map))
    } else {
        train_logistic(data, config, feature_map)
    }
}
