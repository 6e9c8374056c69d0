use std::fmt::Write as _;
use std::path::Path;

use crate::error::{contract, Error, Result};
use crate::mdp::Environment;

/// Multiclass linear scorer: one weight row per action, action = argmax score.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    num_actions: usize,
    feature_dim: usize,
    /// Row-major, `num_actions x feature_dim`.
    weights: Vec<f64>,
    feature_map: String,
}

const FORMAT_HEADER: &str = "rail-linear-policy v1";

impl LinearPolicy {
    /// All-zero weights: uniform probabilities, action 0 by tie-break.
    pub fn zeros(num_actions: usize, feature_dim: usize, feature_map: impl Into<String>) -> Self {
        Self {
            num_actions,
            feature_dim,
            weights: vec![0.0; num_actions * feature_dim],
            feature_map: feature_map.into(),
        }
    }

    pub fn from_weights(
        num_actions: usize,
        feature_dim: usize,
        weights: Vec<f64>,
        feature_map: impl Into<String>,
    ) -> Result<Self> {
        if num_actions < 1 || feature_dim < 1 {
            return Err(contract("policy dimensions must be positive"));
        }
        if weights.len() != num_actions * feature_dim {
            return Err(contract(format!(
                "expected {} weights, got {}",
                num_actions * feature_dim,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(contract("policy weights must be finite"));
        }
        Ok(Self {
            num_actions,
            feature_dim,
            weights,
            feature_map: feature_map.into(),
        })
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn feature_map(&self) -> &str {
        &self.feature_map
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, action: usize) -> &[f64] {
        &self.weights[action * self.feature_dim..(action + 1) * self.feature_dim]
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= c);
        out
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            x.len(),
            self.feature_dim,
            "feature vector has the wrong dimension for this policy"
        );
        (0..self.num_actions)
            .map(|a| dot(self.row(a), x))
            .collect()
    }

    /// Greedy action; ties go to the lowest index.
    pub fn act(&self, x: &[f64]) -> usize {
        argmax(&self.scores(x))
    }

    /// Softmax over row scores.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.scores(x))
    }

    /// Bind to an environment's feature map, yielding a policy over raw states.
    pub fn on<'a, E: Environment + ?Sized>(
        &'a self,
        env: &'a E,
    ) -> impl Fn(&E::State) -> usize + 'a {
        move |s| self.act(&env.featurize(s))
    }

    /// Flat text encoding: header, dims, feature map id, then one row of
    /// weights per action with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_HEADER}");
        let _ = writeln!(out, "dims {} {}", self.num_actions, self.feature_dim);
        let _ = writeln!(out, "features {}", self.feature_map);
        for a in 0..self.num_actions {
            let row: Vec<String> = self.row(a).iter().map(|w| format!("{w:.16e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        match lines.next() {
            Some((_, h)) if h.trim() == FORMAT_HEADER => {}
            Some((i, _)) => return Err(parse_err(i, "unrecognized policy header")),
            None => return Err(parse_err(0, "empty policy file")),
        }
        let (i, dims) = lines.next().ok_or_else(|| parse_err(1, "missing dims"))?;
        let dims: Vec<&str> = dims.split_whitespace().collect();
        if dims.len() != 3 || dims[0] != "dims" {
            return Err(parse_err(i, "expected `dims <actions> <features>`"));
        }
        let num_actions: usize = dims[1].parse().map_err(|_| parse_err(i, "bad action count"))?;
        let feature_dim: usize = dims[2].parse().map_err(|_| parse_err(i, "bad feature count"))?;
        let (i, features) = lines.next().ok_or_else(|| parse_err(2, "missing features"))?;
        let feature_map = features
            .strip_prefix("features ")
            .ok_or_else(|| parse_err(i, "expected `features <id>`"))?
            .trim()
            .to_string();
        let mut weights = Vec::with_capacity(num_actions * feature_dim);
        for _ in 0..num_actions {
            let (i, row) = lines
                .next()
                .ok_or_else(|| parse_err(3 + weights.len() / feature_dim.max(1), "missing row"))?;
            let before = weights.len();
            for tok in row.split_whitespace() {
                weights.push(tok.parse::<f64>().map_err(|_| parse_err(i, "bad weight"))?);
            }
            if weights.len() - before != feature_dim {
                return Err(parse_err(i, "row has the wrong number of weights"));
            }
        }
        Self::from_weights(num_actions, feature_dim, weights, feature_map)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of the maximum; lowest index on ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}
