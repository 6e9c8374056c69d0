//! Pool-based i.i.d. active learning selectors: random, query-by-committee,
//! and density-weighted query-by-committee.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::mdp::StateVec;
use crate::policy::Committee;
use crate::rng::RngStream;

/// Entropy (nats) of the committee's hard-vote distribution at `x`.
pub fn vote_entropy(committee: &Committee, x: &[f64]) -> f64 {
    entropy_of_votes(&committee.votes(x))
}

/// `-Σ (v/K) ln(v/K)` over nonzero vote counts.
pub fn entropy_of_votes(votes: &[usize]) -> f64 {
    let k: usize = votes.iter().sum();
    if k == 0 {
        return 0.0;
    }
    let k = k as f64;
    let h: f64 = votes
        .iter()
        .filter(|&&v| v > 0)
        .map(|&v| {
            let p = v as f64 / k;
            -p * p.ln()
        })
        .sum();
    // A unanimous vote gives -1·ln 1 = -0.0; report a clean zero.
    h.max(0.0)
}

/// Grid binning over the pool's bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinningConfig {
    /// Bins per dimension; the bin width is `(max - min) / bins`.
    pub bins: usize,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self { bins: 10 }
    }
}

impl BinningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 1 {
            return Err(contract("binning needs at least one bin per dimension"));
        }
        Ok(())
    }
}

/// Per-dimension bin widths and origins computed from a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub min: Vec<f64>,
    pub width: Vec<f64>,
    pub bins: usize,
}

impl Grid {
    pub fn fit(pool: &[StateVec], config: &BinningConfig) -> Result<Self> {
        config.validate()?;
        let first = pool.first().ok_or_else(|| contract("density estimation needs a nonempty pool"))?;
        let d = first.len();
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for s in pool {
            if s.len() != d {
                return Err(contract("pool states have differing dimensions"));
            }
            for i in 0..d {
                min[i] = min[i].min(s[i]);
                max[i] = max[i].max(s[i]);
            }
        }
        let width = min.iter().zip(&max).map(|(lo, hi)| (hi - lo) / config.bins as f64).collect();
        Ok(Self {
            min,
            width,
            bins: config.bins,
        })
    }

    /// Cell of `x`; zero-width dimensions map to cell 0, the max edge to the last cell.
    pub fn cell(&self, x: &[f64]) -> Vec<u32> {
        x.iter()
            .zip(self.min.iter().zip(&self.width))
            .map(|(&v, (&lo, &w))| {
                if w > 0.0 {
                    (((v - lo) / w).floor().max(0.0) as usize).min(self.bins - 1) as u32
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Fraction of the pool sharing each state's grid cell.
pub fn estimate_density(pool: &[StateVec], config: &BinningConfig) -> Result<Vec<f64>> {
    let grid = Grid::fit(pool, config)?;
    let cells: Vec<Vec<u32>> = pool.iter().map(|s| grid.cell(s)).collect();
    let mut counts: HashMap<&[u32], usize> = HashMap::new();
    for c in &cells {
        *counts.entry(c.as_slice()).or_default() += 1;
    }
    let n = pool.len() as f64;
    Ok(cells.iter().map(|c| counts[c.as_slice()] as f64 / n).collect())
}

/// Index of the largest score; ties go to the lowest index.
fn first_argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn check_pool(pool: &[StateVec], committee: &Committee) -> Result<()> {
    if pool.is_empty() {
        return Err(contract("selector needs a nonempty pool"));
    }
    let d = committee.members()[0].feature_dim();
    if pool.iter().any(|s| s.len() != d) {
        return Err(contract("pool dimension does not match the committee"));
    }
    Ok(())
}

pub fn pool_entropies(pool: &[StateVec], committee: &Committee) -> Vec<f64> {
    pool.par_iter().map(|s| vote_entropy(committee, s)).collect()
}

/// Argmax of vote entropy.
pub fn select_qbc(pool: &[StateVec], committee: &Committee) -> Result<usize> {
    check_pool(pool, committee)?;
    Ok(first_argmax(&pool_entropies(pool, committee)))
}

/// Argmax of density × vote entropy.
pub fn select_dwqbc(pool: &[StateVec], committee: &Committee, config: &BinningConfig) -> Result<usize> {
    check_pool(pool, committee)?;
    let density = estimate_density(pool, config)?;
    Ok(density_weighted_argmax(&density, &pool_entropies(pool, committee)))
}

/// Argmax of `density[i] * entropy[i]`; ties go to the lowest index.
pub fn density_weighted_argmax(density: &[f64], entropy: &[f64]) -> usize {
    let scores: Vec<f64> = density.iter().zip(entropy).map(|(w, h)| w * h).collect();
    first_argmax(&scores)
}

/// Uniform pool index.
pub fn select_random(pool_len: usize, rng: &mut RngStream) -> Result<usize> {
    if pool_len == 0 {
        return Err(contract("selector needs a nonempty pool"));
    }
    Ok(rng.index(pool_len))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    Random,
    Qbc,
    DwQbc,
}

impl Selector {
    pub fn needs_committee(&self) -> bool {
        !matches!(self, Selector::Random)
    }

    pub fn select(
        &self,
        pool: &[StateVec],
        committee: &Committee,
        binning: &BinningConfig,
        rng: &mut RngStream,
    ) -> Result<usize> {
        match self {
            Selector::Random => select_random(pool.len(), rng),
            Selector::Qbc => select_qbc(pool, committee),
            Selector::DwQbc => select_dwqbc(pool, committee, binning),
        }
    }
}
