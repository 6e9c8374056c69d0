use crate::env::DiscreteMdp;
use crate::error::{contract, Error, Result};
use crate::learners::LearnedPolicy;

/// Largest `(n·m)^T` the enumerator will attempt.
pub const BRANCH_LIMIT: f64 = 1e7;

/// Deterministic policy on a discrete MDP as an explicit table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tabular {
    /// `table[s]`
    Stationary(Vec<usize>),
    /// `table[t][s]`, zero-based `t`.
    NonStationary(Vec<Vec<usize>>),
}

impl Tabular {
    pub fn act(&self, s: usize, t: usize) -> usize {
        match self {
            Self::Stationary(table) => table[s],
            Self::NonStationary(tables) => tables[t.min(tables.len() - 1)][s],
        }
    }

    /// Tabulate a learned policy on the MDP's one-hot features.
    pub fn of(mdp: &DiscreteMdp, policy: &LearnedPolicy) -> Self {
        let n = mdp.num_states();
        match policy {
            LearnedPolicy::Stationary(p) => Self::Stationary((0..n).map(|s| p.act(&mdp.one_hot(s))).collect()),
            LearnedPolicy::NonStationary(p) => Self::NonStationary(
                p.steps()
                    .iter()
                    .map(|step| (0..n).map(|s| step.act(&mdp.one_hot(s))).collect())
                    .collect(),
            ),
        }
    }

    fn check(&self, mdp: &DiscreteMdp) -> Result<()> {
        let tables: Vec<&Vec<usize>> = match self {
            Self::Stationary(t) => vec![t],
            Self::NonStationary(ts) => ts.iter().collect(),
        };
        if tables.is_empty() {
            return Err(contract("policy table is empty"));
        }
        for t in tables {
            if t.len() != mdp.num_states() {
                return Err(contract("policy table does not cover every state"));
            }
            if t.iter().any(|&a| a >= mdp.num_actions()) {
                return Err(contract("policy table names an action the MDP lacks"));
            }
        }
        Ok(())
    }
}

/// One trajectory `(s_1, a_1, ..., s_T, a_T)` and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTrajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub probability: f64,
}

/// Every nonzero-probability length-`T` trajectory of a deterministic policy.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDist {
    pub trajectories: Vec<WeightedTrajectory>,
}

impl TrajectoryDist {
    pub fn total_probability(&self) -> f64 {
        self.trajectories.iter().map(|t| t.probability).sum()
    }
}

/// Refuse enumerations whose naive branch count `(n·m)^T` exceeds [`BRANCH_LIMIT`].
pub fn size_guard(mdp: &DiscreteMdp, horizon: usize) -> Result<()> {
    let branches = ((mdp.num_states() * mdp.num_actions()) as f64).powi(horizon as i32);
    if branches > BRANCH_LIMIT {
        return Err(Error::SizeGuard {
            branches,
            limit: BRANCH_LIMIT,
        });
    }
    Ok(())
}

pub fn enumerate_trajectories(mdp: &DiscreteMdp, policy: &Tabular, horizon: usize) -> Result<TrajectoryDist> {
    size_guard(mdp, horizon)?;
    policy.check(mdp)?;
    let mut out = Vec::new();
    if horizon == 0 {
        return Ok(TrajectoryDist { trajectories: out });
    }
    let mut states = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    for (s, &p) in mdp.initial().iter().enumerate() {
        if p > 0.0 {
            extend(mdp, policy, horizon, s, p, &mut states, &mut actions, &mut out);
        }
    }
    Ok(TrajectoryDist { trajectories: out })
}

#[allow(clippy::too_many_arguments)]
fn extend(
    mdp: &DiscreteMdp,
    policy: &Tabular,
    horizon: usize,
    s: usize,
    p: f64,
    states: &mut Vec<usize>,
    actions: &mut Vec<usize>,
    out: &mut Vec<WeightedTrajectory>,
) {
    let t = states.len();
    let a = policy.act(s, t);
    states.push(s);
    actions.push(a);
    if t + 1 == horizon {
        out.push(WeightedTrajectory {
            states: states.clone(),
            actions: actions.clone(),
            probability: p,
        });
    } else {
        for (next, &q) in mdp.transition(s, a).iter().enumerate() {
            if q > 0.0 {
                extend(mdp, policy, horizon, next, p * q, states, actions, out);
            }
        }
    }
    states.pop();
    actions.pop();
}

/// Expected total reward over the MDP's horizon.
pub fn exact_value(mdp: &DiscreteMdp, policy: &Tabular) -> Result<f64> {
    let dist = enumerate_trajectories(mdp, policy, mdp.horizon())?;
    Ok(dist
        .trajectories
        .iter()
        .map(|tr| tr.probability * tr.states.iter().map(|&s| mdp.rewards()[s]).sum::<f64>())
        .sum())
}

/// Probability that `policy` picks the expert's action at each of the first
/// `t` states of a trajectory generated by the expert.
pub fn prob_consistent(mdp: &DiscreteMdp, policy: &Tabular, expert: &Tabular, t: usize) -> Result<f64> {
    let horizon = mdp.horizon();
    if t < 1 || t > horizon {
        return Err(contract(format!("t = {t} outside 1..={horizon}")));
    }
    policy.check(mdp)?;
    let dist = enumerate_trajectories(mdp, expert, t)?;
    Ok(dist
        .trajectories
        .iter()
        .filter(|tr| tr.states.iter().enumerate().all(|(i, &s)| policy.act(s, i) == tr.actions[i]))
        .map(|tr| tr.probability)
        .sum())
}

/// Disagreement of `candidate` with `expert` on `d_reference = (1/T) Σ_t d_t`.
pub fn exact_error(mdp: &DiscreteMdp, candidate: &Tabular, expert: &Tabular, reference: &Tabular) -> Result<f64> {
    candidate.check(mdp)?;
    expert.check(mdp)?;
    let horizon = mdp.horizon();
    let dist = enumerate_trajectories(mdp, reference, horizon)?;
    let total: f64 = dist
        .trajectories
        .iter()
        .map(|tr| {
            let wrong = tr
                .states
                .iter()
                .enumerate()
                .filter(|&(i, &s)| candidate.act(s, i) != expert.act(s, i))
                .count();
            tr.probability * wrong as f64
        })
        .sum();
    Ok(total / horizon as f64)
}

/// Disagreement of the step-`t` decision (one-based) with the expert's on `d_reference^t`.
pub fn exact_error_at(
    mdp: &DiscreteMdp,
    candidate: &Tabular,
    expert: &Tabular,
    reference: &Tabular,
    t: usize,
) -> Result<f64> {
    candidate.check(mdp)?;
    expert.check(mdp)?;
    if t < 1 || t > mdp.horizon() {
        return Err(contract(format!("t = {t} outside 1..={}", mdp.horizon())));
    }
    let dist = enumerate_trajectories(mdp, reference, t)?;
    Ok(dist
        .trajectories
        .iter()
        .filter(|tr| {
            let s = tr.states[t - 1];
            candidate.act(s, t - 1) != expert.act(s, t - 1)
        })
        .map(|tr| tr.probability)
        .sum())
}

/// Per-step state marginals `d_t` (zero-based rows) by forward recursion.
pub fn state_marginals(mdp: &DiscreteMdp, policy: &Tabular) -> Result<Vec<Vec<f64>>> {
    policy.check(mdp)?;
    let n = mdp.num_states();
    let mut rows = vec![mdp.initial().to_vec()];
    for t in 1..mdp.horizon() {
        let prev = &rows[t - 1];
        let mut next = vec![0.0; n];
        for s in 0..n {
            let row = mdp.transition(s, policy.act(s, t - 1));
            for (s2, q) in row.iter().enumerate() {
                next[s2] += prev[s] * q;
            }
        }
        rows.push(next);
    }
    Ok(rows)
}
