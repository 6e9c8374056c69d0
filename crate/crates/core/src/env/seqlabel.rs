//! Synthetic sequence labeling posed as imitation.
//!
//! Each episode labels one word left to right. The state at position `t`
//! shows the symbol window around `t` and the learner's own previous `L`
//! predictions, so an early mistake changes every later state. The target
//! labels come from a fixed linear rule over the window and the *correct*
//! previous labels; the expert answers with that target label no matter what
//! context the learner has produced.

use std::sync::Arc;

use serde_json::json;

use crate::error::{contract, Result};
use crate::mdp::{EnvSpec, Environment, StateVec};
use crate::policy::argmax;
use crate::rng::RngStream;

pub const ALPHABET: usize = 8;
pub const NUM_LABELS: usize = 5;
/// Context slot value for positions before the start of the word.
pub const PAD_LABEL: usize = NUM_LABELS;
const CONTEXT_WIDTH: usize = NUM_LABELS + 1;
const WINDOW_WIDTH: usize = 3 * ALPHABET;

/// Feature dimension for context length `l`: window one-hots, context one-hots, bias.
pub fn feature_dim(context_len: usize) -> usize {
    WINDOW_WIDTH + context_len * CONTEXT_WIDTH + 1
}

/// Write window + context one-hots into `out`, which must be zeroed and of `feature_dim(l)`.
fn encode(word: &[u8], pos: usize, context: &[u8], out: &mut [f64]) {
    for (slot, offset) in [-1i64, 0, 1].into_iter().enumerate() {
        let i = pos as i64 + offset;
        if i >= 0 && (i as usize) < word.len() {
            out[slot * ALPHABET + word[i as usize] as usize] = 1.0;
        }
    }
    for (j, &label) in context.iter().enumerate() {
        out[WINDOW_WIDTH + j * CONTEXT_WIDTH + label as usize] = 1.0;
    }
    let n = out.len();
    out[n - 1] = 1.0;
}

/// Linear labeling rule: `label = argmax_l u_l . phi(window, correct context)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StressRule {
    context_len: usize,
    weights: Vec<f64>,
}

impl StressRule {
    /// Rule with weights derived from `seed`. Context weights are drawn wider
    /// than window weights so the previous labels carry real signal.
    pub fn seeded(seed: u64, context_len: usize) -> Self {
        let mut rng = RngStream::new(seed, 0x5EC_1ABE1);
        let dim = feature_dim(context_len);
        let mut weights = vec![0.0; NUM_LABELS * dim];
        for l in 0..NUM_LABELS {
            for i in 0..dim {
                let spread = if i < WINDOW_WIDTH {
                    1.0
                } else if i + 1 < dim {
                    1.6
                } else {
                    0.0
                };
                weights[l * dim + i] = rng.uniform(-spread, spread);
            }
        }
        Self {
            context_len,
            weights,
        }
    }

    pub fn context_len(&self) -> usize {
        self.context_len
    }

    fn label(&self, features: &[f64]) -> usize {
        let dim = features.len();
        let scores: Vec<f64> = (0..NUM_LABELS)
            .map(|l| {
                self.weights[l * dim..(l + 1) * dim]
                    .iter()
                    .zip(features)
                    .map(|(w, x)| w * x)
                    .sum()
            })
            .collect();
        argmax(&scores)
    }

    /// Correct label sequence for `word`, each label conditioned on the correct predecessors.
    pub fn label_word(&self, word: &[u8]) -> Vec<u8> {
        let dim = feature_dim(self.context_len);
        let mut labels: Vec<u8> = Vec::with_capacity(word.len());
        let mut buf = vec![0.0; dim];
        for pos in 0..word.len() {
            let ctx = context_from(&labels, pos, self.context_len);
            buf.iter_mut().for_each(|x| *x = 0.0);
            encode(word, pos, &ctx, &mut buf);
            labels.push(self.label(&buf) as u8);
        }
        labels
    }
}

/// Most-recent-first context of length `l` at `pos`, padded before the word start.
fn context_from(labels: &[u8], pos: usize, l: usize) -> Vec<u8> {
    (0..l)
        .map(|j| {
            if pos > j {
                labels[pos - 1 - j]
            } else {
                PAD_LABEL as u8
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeqLabelState {
    pub word: Arc<[u8]>,
    /// Correct labels for `word`; visible to the expert, not in the features.
    pub target: Arc<[u8]>,
    pub position: usize,
    /// Learner's previous predictions, most recent first.
    pub context: Vec<u8>,
}

#[derive(Debug, Clone)]
enum Words {
    Fixed(Arc<[u8]>),
    Random { length: usize },
}

#[derive(Debug, Clone)]
pub struct SeqLabelEnv {
    rule: StressRule,
    words: Words,
    horizon: usize,
}

impl SeqLabelEnv {
    /// Environment labeling a single fixed word.
    pub fn for_word(word: &[u8], rule: StressRule) -> Result<Self> {
        if word.is_empty() {
            return Err(contract("word must have at least one symbol"));
        }
        if word.iter().any(|&c| c as usize >= ALPHABET) {
            return Err(contract(format!("symbols must be below {ALPHABET}")));
        }
        Ok(Self {
            rule,
            horizon: word.len(),
            words: Words::Fixed(word.into()),
        })
    }

    /// Environment whose initial distribution draws a fresh uniform word of `length` symbols.
    pub fn random_words(length: usize, rule: StressRule) -> Result<Self> {
        if length == 0 {
            return Err(contract("word length must be at least 1"));
        }
        Ok(Self {
            rule,
            horizon: length,
            words: Words::Random { length },
        })
    }

    pub fn context_len(&self) -> usize {
        self.rule.context_len
    }

    pub fn rule(&self) -> &StressRule {
        &self.rule
    }

    /// The expert's answer: the correct label at the state's position.
    pub fn expert(&self, state: &SeqLabelState) -> usize {
        state.target[state.position] as usize
    }

    pub fn state_for(&self, word: &[u8], position: usize, context: Vec<u8>) -> SeqLabelState {
        SeqLabelState {
            target: self.rule.label_word(word).into(),
            word: word.into(),
            position,
            context,
        }
    }

    fn start(&self, word: Arc<[u8]>) -> SeqLabelState {
        SeqLabelState {
            target: self.rule.label_word(&word).into(),
            word,
            position: 0,
            context: vec![PAD_LABEL as u8; self.rule.context_len],
        }
    }

    fn random_word(&self, length: usize, rng: &mut RngStream) -> Arc<[u8]> {
        (0..length).map(|_| rng.index(ALPHABET) as u8).collect()
    }
}

impl Environment for SeqLabelEnv {
    type State = SeqLabelState;

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: feature_dim(self.rule.context_len),
            num_actions: NUM_LABELS,
            horizon: self.horizon,
        }
    }

    fn initial_state(&self, rng: &mut RngStream) -> SeqLabelState {
        match &self.words {
            Words::Fixed(w) => self.start(w.clone()),
            Words::Random { length } => {
                let w = self.random_word(*length, rng);
                self.start(w)
            }
        }
    }

    fn step(&self, state: &SeqLabelState, action: usize, _rng: &mut RngStream) -> SeqLabelState {
        let mut context = Vec::with_capacity(state.context.len());
        if !state.context.is_empty() {
            context.push(action as u8);
            context.extend_from_slice(&state.context[..state.context.len() - 1]);
        }
        SeqLabelState {
            word: state.word.clone(),
            target: state.target.clone(),
            position: (state.position + 1).min(state.word.len() - 1),
            context,
        }
    }

    fn reward(&self, state: &SeqLabelState, action: usize) -> f64 {
        if action == state.target[state.position] as usize {
            1.0
        } else {
            0.0
        }
    }

    fn featurize(&self, state: &SeqLabelState) -> StateVec {
        let mut v = vec![0.0; feature_dim(self.rule.context_len)];
        encode(&state.word, state.position, &state.context, &mut v);
        StateVec::from_finite(v)
    }

    /// Uniform over words, positions, and (valid) context labelings.
    fn uniform_state(&self, rng: &mut RngStream) -> Option<SeqLabelState> {
        let word = match &self.words {
            Words::Fixed(w) => w.clone(),
            Words::Random { length } => self.random_word(*length, rng),
        };
        let position = rng.index(word.len());
        let context = (0..self.rule.context_len)
            .map(|j| {
                if position > j {
                    rng.index(NUM_LABELS) as u8
                } else {
                    PAD_LABEL as u8
                }
            })
            .collect();
        Some(SeqLabelState {
            target: self.rule.label_word(&word).into(),
            word,
            position,
            context,
        })
    }

    fn has_uniform_sampler(&self) -> bool {
        true
    }

    /// Per-step accuracy.
    fn performance(&self, total_reward: f64) -> f64 {
        total_reward / self.horizon as f64
    }

    fn state_values(&self, state: &SeqLabelState) -> Vec<f64> {
        let mut v = vec![state.position as f64];
        v.extend(window(state).iter().map(|&c| c as f64));
        v.extend(state.context.iter().map(|&c| c as f64));
        v
    }

    fn render(&self, state: &SeqLabelState) -> serde_json::Value {
        json!({
            "position": state.position,
            "window": window(state),
            "context": state.context,
        })
    }

    fn action_labels(&self) -> Vec<String> {
        (0..NUM_LABELS).map(|l| format!("stress-{l}")).collect()
    }
}

/// Symbols at `pos-1, pos, pos+1`; `-1` outside the word.
fn window(state: &SeqLabelState) -> [i64; 3] {
    let mut out = [-1; 3];
    for (slot, offset) in [-1i64, 0, 1].into_iter().enumerate() {
        let i = state.position as i64 + offset;
        if i >= 0 && (i as usize) < state.word.len() {
            out[slot] = state.word[i as usize] as i64;
        }
    }
    out
}
