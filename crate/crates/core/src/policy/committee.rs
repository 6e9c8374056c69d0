use rayon::prelude::*;

use super::dataset::Dataset;
use super::linear::LinearPolicy;
use super::train::{train_logistic, TrainConfig};
use crate::error::{contract, Result};
use crate::rng::RngStream;

/// Bagged ensemble of policies used both for disagreement scoring and as a
/// sample from the approximate posterior over policies.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee {
    members: Vec<LinearPolicy>,
}

impl Committee {
    pub fn new(members: Vec<LinearPolicy>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| contract("a committee needs at least one member"))?;
        let (a, d) = (first.num_actions(), first.feature_dim());
        if members
            .iter()
            .any(|m| m.num_actions() != a || m.feature_dim() != d)
        {
            return Err(contract("committee members must share dimensions"));
        }
        Ok(Self { members })
    }

    /// `k` zero-weight members: the uniform-prior cold start.
    pub fn cold(k: usize, num_actions: usize, feature_dim: usize, feature_map: &str) -> Result<Self> {
        Self::new(vec![LinearPolicy::zeros(num_actions, feature_dim, feature_map); k])
    }

    pub fn members(&self) -> &[LinearPolicy] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.members[0].num_actions()
    }

    /// Hard-vote counts per action.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut v = vec![0; self.num_actions()];
        for m in &self.members {
            v[m.act(x)] += 1;
        }
        v
    }
}

/// Bootstrap indices: `n` draws with replacement from `0..n`.
pub fn bootstrap_indices(n: usize, rng: &mut RngStream) -> Vec<usize> {
    (0..n).map(|_| rng.index(n)).collect()
}

/// Train `k` policies, each on a with-replacement resample of `data` of size `|data|`.
///
/// Members train in parallel from pre-forked streams, so the result matches a
/// sequential run.
pub fn bootstrap_committee(
    data: &Dataset,
    k: usize,
    config: &TrainConfig,
    feature_map: &str,
    rng: &mut RngStream,
) -> Result<Committee> {
    if data.is_empty() {
        return Err(contract("cannot bag an empty dataset"));
    }
    if k < 1 {
        return Err(contract("committee size must be at least 1"));
    }
    let streams: Vec<RngStream> = (0..k).map(|_| rng.fork()).collect();
    let members = streams
        .into_par_iter()
        .map(|mut r| {
            let idx = bootstrap_indices(data.len(), &mut r);
            train_logistic(&data.resample(&idx), config, feature_map)
        })
        .collect::<Result<Vec<_>>>()?;
    Committee::new(members)
}

/// Bagged committee, or the cold-start committee when `data` is empty.
pub fn committee_or_cold(
    data: &Dataset,
    k: usize,
    config: &TrainConfig,
    feature_map: &str,
    rng: &mut RngStream,
) -> Result<Committee> {
    if data.is_empty() {
        Committee::cold(k, data.num_actions(), data.feature_dim(), feature_map)
    } else {
        bootstrap_committee(data, k, config, feature_map, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::StateVec;

    #[test]
    fn singleton_gives_identical_members() {
        let mut d = Dataset::new(2, 2);
        d.push(StateVec::new(vec![0.3, 1.0]).unwrap(), 1).unwrap();
        let mut rng = RngStream::new(1, 2);
        let c = bootstrap_committee(&d, 5, &TrainConfig::default(), "t", &mut rng).unwrap();
        assert_eq!(c.len(), 5);
        for m in c.members() {
            assert_eq!(m, &c.members()[0]);
        }
    }

    #[test]
    fn bootstrap_sample_size_matches() {
        let mut rng = RngStream::new(3, 0);
        for n in [1, 7, 40] {
            let idx = bootstrap_indices(n, &mut rng);
            assert_eq!(idx.len(), n);
            assert!(idx.iter().all(|&i| i < n));
        }
    }

    #[test]
    fn empty_rejected_and_cold_start() {
        let d = Dataset::new(3, 4);
        let mut rng = RngStream::new(0, 0);
        assert!(bootstrap_committee(&d, 5, &TrainConfig::default(), "t", &mut rng).is_err());
        let c = committee_or_cold(&d, 5, &TrainConfig::default(), "t", &mut rng).unwrap();
        assert_eq!(c.votes(&[1.0, 2.0, 3.0, 4.0]), vec![5, 0, 0]);
    }

    #[test]
    fn deterministic_given_stream() {
        let mut d = Dataset::new(2, 2);
        for i in 0..10 {
            let x = i as f64 - 4.5;
            d.push(StateVec::new(vec![x, 1.0]).unwrap(), usize::from(x > 0.0)).unwrap();
        }
        let a = bootstrap_committee(&d, 4, &TrainConfig::default(), "t", &mut RngStream::new(9, 9)).unwrap();
        let b = bootstrap_committee(&d, 4, &TrainConfig::default(), "t", &mut RngStream::new(9, 9)).unwrap();
        assert_eq!(a, b);
    }
}
