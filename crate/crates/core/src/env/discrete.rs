//! Explicit-table MDPs small enough for exhaustive trajectory enumeration.

use rand_distr::{Distribution, Gamma};

use crate::error::{contract, Result};
use crate::mdp::{EnvSpec, Environment, StateVec};
use crate::rng::RngStream;

pub const MAX_STATES: usize = 12;
pub const MAX_ACTIONS: usize = 4;
pub const MAX_HORIZON: usize = 6;

const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMdp {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    /// `transitions[s][a][s']`
    transitions: Vec<Vec<Vec<f64>>>,
    rewards: Vec<f64>,
    initial: Vec<f64>,
}

impl DiscreteMdp {
    pub fn new(
        transitions: Vec<Vec<Vec<f64>>>,
        rewards: Vec<f64>,
        initial: Vec<f64>,
        horizon: usize,
    ) -> Result<Self> {
        let n = rewards.len();
        let m = transitions.first().map_or(0, |row| row.len());
        check_bounds(n, m, horizon)?;
        if transitions.len() != n || initial.len() != n {
            return Err(contract("transition, reward and initial tables disagree on |S|"));
        }
        for (s, per_action) in transitions.iter().enumerate() {
            if per_action.len() != m {
                return Err(contract(format!("state {s} has {} actions, expected {m}", per_action.len())));
            }
            for (a, row) in per_action.iter().enumerate() {
                if row.len() != n {
                    return Err(contract(format!("P[{s}][{a}] has the wrong length")));
                }
                check_distribution(row).map_err(|e| contract(format!("P[{s}][{a}]: {e}")))?;
            }
        }
        check_distribution(&initial).map_err(|e| contract(format!("initial distribution: {e}")))?;
        if let Some(s) = rewards.iter().position(|r| !(0.0..=1.0).contains(r)) {
            return Err(contract(format!("R[{s}] outside [0, 1]")));
        }
        Ok(Self {
            num_states: n,
            num_actions: m,
            horizon,
            transitions,
            rewards,
            initial,
        })
    }

    /// Random MDP: transition rows and `I` drawn from a symmetric Dirichlet
    /// with concentration `alpha`, rewards uniform on `[0, 1]`.
    pub fn random(n: usize, m: usize, horizon: usize, alpha: f64, rng: &mut RngStream) -> Result<Self> {
        check_bounds(n, m, horizon)?;
        if !(alpha > 0.0) {
            return Err(contract("Dirichlet concentration must be positive"));
        }
        let gamma = Gamma::new(alpha, 1.0).map_err(|e| contract(e.to_string()))?;
        let dirichlet = |rng: &mut RngStream| -> Vec<f64> {
            loop {
                let xs: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
                let total: f64 = xs.iter().sum();
                if total > 0.0 {
                    return xs.into_iter().map(|x| x / total).collect();
                }
            }
        };
        let transitions = (0..n)
            .map(|_| (0..m).map(|_| dirichlet(rng)).collect())
            .collect();
        let initial = dirichlet(rng);
        let rewards = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
        Self::new(transitions, rewards, initial, horizon)
    }

    /// Deterministic chain of `length` states starting at state 0. Action 0
    /// stays put, action 1 advances (saturating at the last state). Every
    /// state pays reward 1. Horizon equals `length`.
    pub fn chain(length: usize) -> Result<Self> {
        check_bounds(length, 2, length)?;
        let transitions = (0..length)
            .map(|s| {
                let mut stay = vec![0.0; length];
                stay[s] = 1.0;
                let mut advance = vec![0.0; length];
                advance[(s + 1).min(length - 1)] = 1.0;
                vec![stay, advance]
            })
            .collect();
        let mut initial = vec![0.0; length];
        initial[0] = 1.0;
        Self::new(transitions, vec![1.0; length], initial, length)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        check_bounds(self.num_states, self.num_actions, horizon)?;
        Ok(Self {
            horizon,
            ..self.clone()
        })
    }

    pub fn with_rewards(&self, rewards: Vec<f64>) -> Result<Self> {
        Self::new(self.transitions.clone(), rewards, self.initial.clone(), self.horizon)
    }

    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        &self.transitions[s][a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn one_hot(&self, s: usize) -> StateVec {
        let mut v = vec![0.0; self.num_states];
        v[s] = 1.0;
        StateVec::from_finite(v)
    }
}

/// Stochastic-matrix validation for one distribution.
pub fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err("entries must be finite and nonnegative".into());
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(format!("sums to {total}, not 1"));
    }
    Ok(())
}

fn check_bounds(n: usize, m: usize, horizon: usize) -> Result<()> {
    if !(1..=MAX_STATES).contains(&n) {
        return Err(contract(format!("num_states {n} outside 1..={MAX_STATES}")));
    }
    if !(2..=MAX_ACTIONS).contains(&m) {
        return Err(contract(format!("num_actions {m} outside 2..={MAX_ACTIONS}")));
    }
    if !(1..=MAX_HORIZON).contains(&horizon) {
        return Err(contract(format!("horizon {horizon} outside 1..={MAX_HORIZON}")));
    }
    Ok(())
}

impl Environment for DiscreteMdp {
    type State = usize;

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: self.num_states,
            num_actions: self.num_actions,
            horizon: self.horizon,
        }
    }

    fn initial_state(&self, rng: &mut RngStream) -> usize {
        rng.categorical(&self.initial)
    }

    fn step(&self, state: &usize, action: usize, rng: &mut RngStream) -> usize {
        rng.categorical(&self.transitions[*state][action])
    }

    fn reward(&self, state: &usize, _action: usize) -> f64 {
        self.rewards[*state]
    }

    fn featurize(&self, state: &usize) -> StateVec {
        self.one_hot(*state)
    }

    fn uniform_state(&self, rng: &mut RngStream) -> Option<usize> {
        Some(rng.index(self.num_states))
    }

    fn has_uniform_sampler(&self) -> bool {
        true
    }

    fn state_values(&self, state: &usize) -> Vec<f64> {
        vec![*state as f64]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_rows_are_stochastic() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..50 {
            let mdp = DiscreteMdp::random(6, 3, 5, 1.0, &mut rng).unwrap();
            for s in 0..6 {
                for a in 0..3 {
                    let total: f64 = mdp.transition(s, a).iter().sum();
                    assert!((total - 1.0).abs() <= 1e-12);
                }
            }
            assert!((mdp.initial().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(mdp.rewards().iter().all(|r| (0.0..=1.0).contains(r)));
        }
    }

    #[test]
    fn random_is_seeded() {
        let a = DiscreteMdp::random(4, 2, 3, 1.0, &mut RngStream::new(5, 1)).unwrap();
        let b = DiscreteMdp::random(4, 2, 3, 1.0, &mut RngStream::new(5, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bounds_enforced() {
        let mut rng = RngStream::new(0, 0);
        assert!(DiscreteMdp::random(13, 2, 3, 1.0, &mut rng).is_err());
        assert!(DiscreteMdp::random(3, 5, 3, 1.0, &mut rng).is_err());
        assert!(DiscreteMdp::random(3, 2, 7, 1.0, &mut rng).is_err());
        assert!(DiscreteMdp::random(3, 1, 3, 1.0, &mut rng).is_err());
        assert!(DiscreteMdp::chain(0).is_err());
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let t = vec![vec![vec![0.5, 0.6], vec![1.0, 0.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]];
        assert!(DiscreteMdp::new(t, vec![0.0, 1.0], vec![1.0, 0.0], 2).is_err());
    }

    #[test]
    fn rejects_reward_outside_unit_interval() {
        let chain = DiscreteMdp::chain(3).unwrap();
        assert!(chain.with_rewards(vec![1.0, 1.5, 0.0]).is_err());
    }

    #[test]
    fn chain_advances() {
        let chain = DiscreteMdp::chain(3).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(chain.step(&0, 1, &mut rng), 1);
        assert_eq!(chain.step(&2, 1, &mut rng), 2);
        assert_eq!(chain.step(&1, 0, &mut rng), 1);
    }
}
