//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Objective: mean negative log-likelihood of the softmax model plus
//! `(lambda / 2) * ||W||^2` over every weight (bias column included). The
//! optimizer starts from zero weights and takes Armijo backtracking steps, so
//! the objective never increases and the result depends only on the data
//! order and the config.

use super::dataset::Dataset;
use super::linear::{dot, LinearPolicy};
use crate::error::{contract, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub l2: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            l2: 1e-3,
            max_iters: 2000,
            grad_tol: 1e-6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2 >= 0.0) {
            return Err(contract("l2 strength must be nonnegative"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(contract("gradient tolerance must be positive"));
        }
        Ok(())
    }
}

/// Optimizer trace, mostly for tests and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub objective_trace: Vec<f64>,
}

/// Regularized objective and its gradient at `weights` (row-major, actions x features).
pub fn objective_and_gradient(data: &Dataset, weights: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let a_n = data.num_actions();
    let d = data.feature_dim();
    let n = data.len() as f64;
    let mut grad = vec![0.0; a_n * d];
    let mut nll = 0.0;
    let mut scores = vec![0.0; a_n];
    for (x, y) in data.iter() {
        for (a, s) in scores.iter_mut().enumerate() {
            *s = dot(&weights[a * d..(a + 1) * d], x);
        }
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
        let lse = m + z.ln();
        nll += lse - scores[*y];
        for a in 0..a_n {
            let p = (scores[a] - lse).exp();
            let r = p - if a == *y { 1.0 } else { 0.0 };
            if r != 0.0 {
                let row = &mut grad[a * d..(a + 1) * d];
                for (g, xi) in row.iter_mut().zip(x.iter()) {
                    *g += r * xi;
                }
            }
        }
    }
    let reg: f64 = weights.iter().map(|w| w * w).sum::<f64>() * 0.5 * l2;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (nll / n + reg, grad)
}

fn objective(data: &Dataset, weights: &[f64], l2: f64) -> f64 {
    let a_n = data.num_actions();
    let d = data.feature_dim();
    let mut nll = 0.0;
    let mut scores = vec![0.0; a_n];
    for (x, y) in data.iter() {
        for (a, s) in scores.iter_mut().enumerate() {
            *s = dot(&weights[a * d..(a + 1) * d], x);
        }
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
        nll += m + z.ln() - scores[*y];
    }
    nll / data.len() as f64 + weights.iter().map(|w| w * w).sum::<f64>() * 0.5 * l2
}

pub fn train_logistic(data: &Dataset, config: &TrainConfig, feature_map: &str) -> Result<LinearPolicy> {
    train_logistic_with_report(data, config, feature_map).map(|(p, _)| p)
}

pub fn train_logistic_with_report(
    data: &Dataset,
    config: &TrainConfig,
    feature_map: &str,
) -> Result<(LinearPolicy, TrainReport)> {
    config.validate()?;
    if data.is_empty() {
        return Err(contract("cannot train on an empty dataset"));
    }
    let mut w = vec![0.0; data.num_actions() * data.feature_dim()];
    let (mut f, mut g) = objective_and_gradient(data, &w, config.l2);
    let mut trace = vec![f];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut candidate = vec![0.0; w.len()];
    let mut gnorm = norm(&g);
    while iterations < config.max_iters && gnorm > config.grad_tol {
        let g2 = gnorm * gnorm;
        // Try a larger step than last time, then halve until Armijo holds.
        let mut t = step * 2.0;
        let mut accepted = None;
        while t > 1e-20 {
            for ((c, wi), gi) in candidate.iter_mut().zip(&w).zip(&g) {
                *c = wi - t * gi;
            }
            let fc = objective(data, &candidate, config.l2);
            if fc <= f - 1e-4 * t * g2 {
                accepted = Some(fc);
                break;
            }
            t *= 0.5;
        }
        let Some(fc) = accepted else { break };
        std::mem::swap(&mut w, &mut candidate);
        step = t;
        iterations += 1;
        let (f_new, g_new) = objective_and_gradient(data, &w, config.l2);
        debug_assert!((f_new - fc).abs() <= 1e-9 * (1.0 + fc.abs()));
        f = f_new;
        g = g_new;
        gnorm = norm(&g);
        trace.push(f);
    }
    let policy = LinearPolicy::from_weights(data.num_actions(), data.feature_dim(), w, feature_map)?;
    Ok((
        policy,
        TrainReport {
            iterations,
            grad_norm: gnorm,
            converged: gnorm <= config.grad_tol,
            objective_trace: trace,
        },
    ))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
