//! Concrete environments with their experts, and the name registry used by configs.

pub mod cartpole;
pub mod discrete;
pub mod seqlabel;

use serde::{Deserialize, Serialize};

pub use cartpole::{CartPole, CartPoleState, FailureMode};
pub use discrete::DiscreteMdp;
pub use seqlabel::{SeqLabelEnv, SeqLabelState, StressRule};

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const ENV_NAMES: &[&str] = &["cartpole", "seqlabel-L1", "seqlabel-L2", "chain-k", "random-mdp"];

/// Tunables for building a registered environment. Unused fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    /// Episode length; `None` picks the environment's default.
    pub horizon: Option<usize>,
    /// Cart-pole start states are uniform in `±start_radius`.
    pub start_radius: f64,
    pub failure_mode: FailureMode,
    pub word_length: usize,
    pub rule_seed: u64,
    pub mdp_states: usize,
    pub mdp_actions: usize,
    pub mdp_seed: u64,
    pub dirichlet_alpha: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            horizon: None,
            start_radius: 0.05,
            failure_mode: FailureMode::default(),
            word_length: 8,
            rule_seed: 0,
            mdp_states: 6,
            mdp_actions: 3,
            mdp_seed: 0,
            dirichlet_alpha: 1.0,
        }
    }
}

/// A discrete MDP paired with a deterministic tabular expert.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTask {
    pub mdp: DiscreteMdp,
    pub expert: Vec<usize>,
}

/// A registered environment, ready for a learner.
#[derive(Debug, Clone)]
pub enum EnvHandle {
    CartPole(CartPole),
    SeqLabel(SeqLabelEnv),
    Discrete(DiscreteTask),
}

impl EnvHandle {
    pub fn build(name: &str, params: &EnvParams) -> Result<Self> {
        match name {
            "cartpole" => {
                let horizon = params.horizon.unwrap_or(500);
                if horizon < 1 {
                    return Err(Error::Config("cartpole horizon must be at least 1".into()));
                }
                if !(params.start_radius >= 0.0) {
                    return Err(Error::Config("start_radius must be nonnegative".into()));
                }
                Ok(Self::CartPole(CartPole::new(horizon, params.start_radius, params.failure_mode)))
            }
            "seqlabel-L1" | "seqlabel-L2" => {
                let l = if name.ends_with('1') { 1 } else { 2 };
                if let Some(h) = params.horizon {
                    if h != params.word_length {
                        return Err(Error::Config(format!(
                            "seqlabel horizon is the word length ({}), got {h}",
                            params.word_length
                        )));
                    }
                }
                let env = SeqLabelEnv::random_words(params.word_length, StressRule::seeded(params.rule_seed, l))
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(Self::SeqLabel(env))
            }
            "random-mdp" => {
                let horizon = params.horizon.unwrap_or(5);
                let mut rng = RngStream::new(params.mdp_seed, 0x3D9);
                let mdp = DiscreteMdp::random(
                    params.mdp_states,
                    params.mdp_actions,
                    horizon,
                    params.dirichlet_alpha,
                    &mut rng,
                )
                .map_err(|e| Error::Config(e.to_string()))?;
                let expert = (0..params.mdp_states).map(|_| rng.index(params.mdp_actions)).collect();
                Ok(Self::Discrete(DiscreteTask { mdp, expert }))
            }
            _ => {
                if let Some(k) = name.strip_prefix("chain-") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::Config(format!("chain length in {name:?} is not an integer")))?;
                    let mut mdp = DiscreteMdp::chain(k).map_err(|e| Error::Config(e.to_string()))?;
                    if let Some(h) = params.horizon {
                        mdp = mdp.with_horizon(h).map_err(|e| Error::Config(e.to_string()))?;
                    }
                    return Ok(Self::Discrete(DiscreteTask {
                        mdp,
                        expert: vec![1; k],
                    }));
                }
                Err(Error::Config(format!(
                    "unknown environment {name:?}; expected one of {}",
                    ENV_NAMES.join(", ")
                )))
            }
        }
    }

    pub fn has_uniform_sampler(&self) -> bool {
        use crate::mdp::Environment;
        match self {
            Self::CartPole(e) => e.has_uniform_sampler(),
            Self::SeqLabel(e) => e.has_uniform_sampler(),
            Self::Discrete(t) => t.mdp.has_uniform_sampler(),
        }
    }

    /// Identifier recorded in saved policies.
    pub fn feature_map(&self) -> String {
        match self {
            Self::CartPole(_) => "cartpole-raw-bias".into(),
            Self::SeqLabel(e) => format!("seqlabel-L{}", e.context_len()),
            Self::Discrete(t) => format!("one-hot-{}", t.mdp.num_states()),
        }
    }
}

/// Run a generic body against whichever environment a handle holds, with the
/// environment bound to `$env` and its expert (a `Fn(&State) -> usize`) to `$expert`.
#[macro_export]
macro_rules! with_env {
    ($handle:expr, |$env:ident, $expert:ident| $body:expr) => {
        match $handle {
            $crate::env::EnvHandle::CartPole(e) => {
                let $env = e;
                let $expert = |s: &$crate::env::CartPoleState| $crate::env::cartpole::cartpole_expert(s);
                $body
            }
            $crate::env::EnvHandle::SeqLabel(e) => {
                let $env = e;
                let $expert = |s: &$crate::env::SeqLabelState| e.expert(s);
                $body
            }
            $crate::env::EnvHandle::Discrete(t) => {
                let $env = &t.mdp;
                let table = &t.expert;
                let $expert = move |s: &usize| table[*s];
                $body
            }
        }
    };
}
