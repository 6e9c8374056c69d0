//! Episodic MDP abstraction: rollouts, sampling from induced state
//! distributions, and Monte-Carlo value estimation.
//!
//! Episodes always run for the full requested horizon. Environments encode
//! failure as absorbing dynamics instead of truncating, so the time-indexed
//! state distribution `d_t` is defined for every `t`.

use std::fmt::Debug;
use std::ops::Deref;

use crate::error::{contract, Result};
use crate::rng::RngStream;

/// Shape of an environment as seen by a learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvSpec {
    /// Length of the feature vector produced by [`Environment::featurize`].
    pub state_dim: usize,
    pub num_actions: usize,
    pub horizon: usize,
}

impl EnvSpec {
    pub fn new(state_dim: usize, num_actions: usize, horizon: usize) -> Result<Self> {
        if state_dim < 1 {
            return Err(contract("state_dim must be at least 1"));
        }
        if num_actions < 2 {
            return Err(contract("an environment needs at least two actions"));
        }
        if horizon < 1 {
            return Err(contract("horizon must be at least 1"));
        }
        Ok(Self {
            state_dim,
            num_actions,
            horizon,
        })
    }
}

/// Dense, finite feature vector of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec(Vec<f64>);

impl StateVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(contract(format!("state feature {i} is not finite")));
        }
        Ok(Self(values))
    }

    /// Construct without the finiteness check. Callers guarantee finite values.
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A simulator the learner may roll policies through.
///
/// Rewards are visible here for evaluation only; no learner reads them.
pub trait Environment: Send + Sync {
    type State: Clone + Debug + Send + Sync;

    fn spec(&self) -> EnvSpec;

    /// Draw `s_1 ~ I`.
    fn initial_state(&self, rng: &mut RngStream) -> Self::State;

    fn step(&self, state: &Self::State, action: usize, rng: &mut RngStream) -> Self::State;

    /// Reward collected at a step: `R(s)` for state-reward MDPs, which ignore `action`.
    fn reward(&self, state: &Self::State, action: usize) -> f64;

    fn featurize(&self, state: &Self::State) -> StateVec;

    /// Draw a state uniformly over the environment's state space, if one is defined.
    fn uniform_state(&self, _rng: &mut RngStream) -> Option<Self::State> {
        None
    }

    fn has_uniform_sampler(&self) -> bool {
        false
    }

    /// Map an episode's summed reward to the reported performance metric.
    fn performance(&self, total_reward: f64) -> f64 {
        total_reward
    }

    /// Raw state values, as shown to a human expert.
    fn state_values(&self, state: &Self::State) -> Vec<f64> {
        self.featurize(state).into_inner()
    }

    /// Scene parameters for rendering a state; `null` when not renderable.
    fn render(&self, _state: &Self::State) -> serde_json::Value {
        serde_json::Value::Null
    }

    fn action_labels(&self) -> Vec<String> {
        (0..self.spec().num_actions).map(|a| format!("a{a}")).collect()
    }
}

/// A (possibly non-stationary) deterministic policy. `t` is the zero-based step index.
pub trait Policy<S> {
    fn act(&self, state: &S, t: usize) -> usize;
}

impl<S, F> Policy<S> for F
where
    F: Fn(&S) -> usize,
{
    fn act(&self, state: &S, _t: usize) -> usize {
        self(state)
    }
}

/// An executed episode: `(s_t, a_t)` pairs and the reward of each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub steps: Vec<(S, usize)>,
    pub rewards: Option<Vec<f64>>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &S> {
        self.steps.iter().map(|(s, _)| s)
    }

    pub fn into_states(self) -> Vec<S> {
        self.steps.into_iter().map(|(s, _)| s).collect()
    }

    pub fn total_reward(&self) -> Option<f64> {
        self.rewards.as_ref().map(|r| r.iter().sum())
    }
}

/// Execute `policy` for `horizon` steps from `s_1 ~ I`.
pub fn rollout<E, P>(
    env: &E,
    policy: &P,
    horizon: usize,
    rng: &mut RngStream,
) -> Result<Trajectory<E::State>>
where
    E: Environment + ?Sized,
    P: Policy<E::State> + ?Sized,
{
    let num_actions = env.spec().num_actions;
    let mut steps = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    if horizon == 0 {
        return Ok(Trajectory {
            steps,
            rewards: Some(rewards),
        });
    }
    let mut state = env.initial_state(rng);
    for t in 0..horizon {
        let action = policy.act(&state, t);
        if action >= num_actions {
            return Err(contract(format!(
                "policy chose action {action} at step {t}, environment has {num_actions}"
            )));
        }
        rewards.push(env.reward(&state, action));
        let next = if t + 1 < horizon {
            Some(env.step(&state, action, rng))
        } else {
            None
        };
        steps.push((state, action));
        match next {
            Some(s) => state = s,
            None => break,
        }
    }
    Ok(Trajectory {
        steps,
        rewards: Some(rewards),
    })
}

/// `n` independent draws from `d_t`, the distribution of the `t`-th state
/// (one-based) when running `policy` from `s_1 ~ I`.
pub fn sample_d_t<E, P>(
    env: &E,
    policy: &P,
    t: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<E::State>>
where
    E: Environment + ?Sized,
    P: Policy<E::State> + ?Sized,
{
    let horizon = env.spec().horizon;
    if t < 1 || t > horizon {
        return Err(contract(format!("time step {t} outside 1..={horizon}")));
    }
    (0..n)
        .map(|_| {
            let mut episode_rng = rng.fork();
            let traj = rollout(env, policy, t, &mut episode_rng)?;
            Ok(traj.steps.into_iter().last().expect("t >= 1").0)
        })
        .collect()
}

/// `n` draws from `d_pi = (1/T) sum_t d_t`: pick `t` uniformly, then sample `d_t`.
pub fn sample_d_pi<E, P>(env: &E, policy: &P, n: usize, rng: &mut RngStream) -> Result<Vec<E::State>>
where
    E: Environment + ?Sized,
    P: Policy<E::State> + ?Sized,
{
    let horizon = env.spec().horizon;
    (0..n)
        .map(|_| {
            let t = 1 + rng.index(horizon);
            let mut episode_rng = rng.fork();
            let traj = rollout(env, policy, t, &mut episode_rng)?;
            Ok(traj.steps.into_iter().last().expect("t >= 1").0)
        })
        .collect()
}

/// Monte-Carlo estimate of a policy's total reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub episodes: usize,
    /// Set when a single episode makes the standard error meaningless.
    pub degenerate: bool,
}

pub fn estimate_value<E, P>(
    env: &E,
    policy: &P,
    episodes: usize,
    rng: &mut RngStream,
) -> Result<ValueEstimate>
where
    E: Environment + ?Sized,
    P: Policy<E::State> + ?Sized,
{
    if episodes < 1 {
        return Err(contract("estimate_value needs at least one episode"));
    }
    let horizon = env.spec().horizon;
    let returns = (0..episodes)
        .map(|_| {
            let mut episode_rng = rng.fork();
            let traj = rollout(env, policy, horizon, &mut episode_rng)?;
            Ok(traj.total_reward().unwrap_or(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&returns);
    Ok(ValueEstimate {
        mean,
        stderr,
        episodes,
        degenerate: episodes == 1,
    })
}

/// Sample mean and standard error of the mean (zero for fewer than two samples).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
