use crate::error::{contract, Result};
use crate::mdp::StateVec;

/// Labeled `(features, expert action)` examples in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    num_actions: usize,
    feature_dim: usize,
    examples: Vec<(StateVec, usize)>,
}

impl Dataset {
    pub fn new(num_actions: usize, feature_dim: usize) -> Self {
        Self {
            num_actions,
            feature_dim,
            examples: Vec::new(),
        }
    }

    pub fn push(&mut self, features: StateVec, label: usize) -> Result<()> {
        if label >= self.num_actions {
            return Err(contract(format!(
                "label {label} out of range for {} actions",
                self.num_actions
            )));
        }
        if features.len() != self.feature_dim {
            return Err(contract(format!(
                "feature dimension {} does not match dataset dimension {}",
                features.len(),
                self.feature_dim
            )));
        }
        self.examples.push((features, label));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn examples(&self) -> &[(StateVec, usize)] {
        &self.examples
    }

    pub fn iter(&self) -> impl Iterator<Item = &(StateVec, usize)> {
        self.examples.iter()
    }

    /// New dataset holding `self[i]` for each `i` in `indices` (repeats allowed).
    pub fn resample(&self, indices: &[usize]) -> Dataset {
        Dataset {
            num_actions: self.num_actions,
            feature_dim: self.feature_dim,
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    /// Whether `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &Dataset) -> bool {
        self.len() <= other.len() && self.examples[..] == other.examples[..self.len()]
    }
}
