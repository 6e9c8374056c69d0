//! Cart-pole with fixed-length episodes.
//!
//! Classic benchmark constants: gravity 9.8, cart mass 1.0, pole mass 0.1,
//! pole half-length 0.5, force ±10 N, Euler step 0.02 s. The pole is allowed
//! to fall and become horizontal; the episode keeps running. A state is
//! *failed* once `|θ| ≥ π/2` or `|x| > 2.4`, and failure is absorbing.

use std::f64::consts::{FRAC_PI_2, PI};

use serde_json::json;

use crate::mdp::{EnvSpec, Environment, StateVec};
use crate::rng::RngStream;

pub const GRAVITY: f64 = 9.8;
pub const CART_MASS: f64 = 1.0;
pub const POLE_MASS: f64 = 0.1;
pub const HALF_LENGTH: f64 = 0.5;
pub const FORCE: f64 = 10.0;
pub const TAU: f64 = 0.02;
pub const X_BOUND: f64 = 2.4;
pub const FALLEN: f64 = FRAC_PI_2;

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Expert feedback gains on `(x, ẋ, θ, θ̇)`.
pub const EXPERT_GAINS: [f64; 4] = [1.0, 1.5, 18.0, 3.0];

/// Ranges of the uniform state sampler, wide enough to include failed states.
pub const UNIFORM_RANGES: [(f64, f64); 4] = [(-3.0, 3.0), (-3.0, 3.0), (-PI, PI), (-4.0, 4.0)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub const UPRIGHT: Self = Self {
        x: 0.0,
        x_dot: 0.0,
        theta: 0.0,
        theta_dot: 0.0,
    };

    pub fn new(x: f64, x_dot: f64, theta: f64, theta_dot: f64) -> Self {
        Self {
            x,
            x_dot,
            theta,
            theta_dot,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn is_fallen(&self) -> bool {
        self.theta.abs() >= FALLEN
    }

    pub fn out_of_bounds(&self) -> bool {
        self.x.abs() > X_BOUND
    }

    pub fn is_failed(&self) -> bool {
        self.is_fallen() || self.out_of_bounds()
    }
}

/// What happens after failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureMode {
    /// The pole lies flat on the side it fell and the cart keeps rolling
    /// under the applied force. Failed states stay failed.
    #[default]
    Toppled,
    /// The whole state freezes.
    Frozen,
}

/// One physics step. Failed states are absorbing.
pub fn cartpole_step(s: &CartPoleState, action: usize, mode: FailureMode) -> CartPoleState {
    let force = if action == RIGHT { FORCE } else { -FORCE };
    let total_mass = CART_MASS + POLE_MASS;
    if s.is_failed() {
        return match mode {
            FailureMode::Frozen => *s,
            FailureMode::Toppled => {
                let side = if s.theta >= 0.0 { 1.0 } else { -1.0 };
                CartPoleState {
                    x: s.x + TAU * s.x_dot,
                    x_dot: s.x_dot + TAU * force / total_mass,
                    theta: side * FALLEN,
                    theta_dot: 0.0,
                }
            }
        };
    }
    let pole_ml = POLE_MASS * HALF_LENGTH;
    let (sin, cos) = s.theta.sin_cos();
    let temp = (force + pole_ml * s.theta_dot * s.theta_dot * sin) / total_mass;
    let theta_acc =
        (GRAVITY * sin - cos * temp) / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / total_mass));
    let x_acc = temp - pole_ml * theta_acc * cos / total_mass;
    let mut next = CartPoleState {
        x: s.x + TAU * s.x_dot,
        x_dot: s.x_dot + TAU * x_acc,
        theta: s.theta + TAU * s.theta_dot,
        theta_dot: s.theta_dot + TAU * theta_acc,
    };
    if next.is_failed() && mode == FailureMode::Toppled {
        let side = if next.theta >= 0.0 { 1.0 } else { -1.0 };
        next.theta = side * FALLEN;
        next.theta_dot = 0.0;
    }
    next
}

/// +1 while balanced and in bounds, −1 otherwise.
pub fn cartpole_reward(s: &CartPoleState) -> f64 {
    if s.is_failed() {
        -1.0
    } else {
        1.0
    }
}

/// Hand-tuned linear feedback controller: push right iff `k · s > 0`, ties
/// going left. The same law applies in failed states, so the expert stays
/// exactly representable by a linear policy on the raw features.
pub fn cartpole_expert(s: &CartPoleState) -> usize {
    let score: f64 = EXPERT_GAINS.iter().zip(s.as_array()).map(|(k, v)| k * v).sum();
    if score > 0.0 {
        RIGHT
    } else {
        LEFT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartPole {
    horizon: usize,
    start_radius: f64,
    mode: FailureMode,
}

impl CartPole {
    /// Start states uniform in `±start_radius` on all four variables.
    pub fn new(horizon: usize, start_radius: f64, mode: FailureMode) -> Self {
        Self {
            horizon,
            start_radius,
            mode,
        }
    }

    pub fn with_horizon(horizon: usize) -> Self {
        Self::new(horizon, 0.05, FailureMode::default())
    }

    pub fn mode(&self) -> FailureMode {
        self.mode
    }

    pub fn start_radius(&self) -> f64 {
        self.start_radius
    }
}

impl Default for CartPole {
    fn default() -> Self {
        Self::with_horizon(500)
    }
}

impl Environment for CartPole {
    type State = CartPoleState;

    fn spec(&self) -> EnvSpec {
        EnvSpec {
            state_dim: 5,
            num_actions: 2,
            horizon: self.horizon,
        }
    }

    fn initial_state(&self, rng: &mut RngStream) -> CartPoleState {
        let r = self.start_radius;
        CartPoleState {
            x: rng.uniform(-r, r),
            x_dot: rng.uniform(-r, r),
            theta: rng.uniform(-r, r),
            theta_dot: rng.uniform(-r, r),
        }
    }

    fn step(&self, state: &CartPoleState, action: usize, _rng: &mut RngStream) -> CartPoleState {
        cartpole_step(state, action, self.mode)
    }

    fn reward(&self, state: &CartPoleState, _action: usize) -> f64 {
        cartpole_reward(state)
    }

    /// The four raw variables plus a bias term.
    fn featurize(&self, s: &CartPoleState) -> StateVec {
        StateVec::from_finite(vec![s.x, s.x_dot, s.theta, s.theta_dot, 1.0])
    }

    fn uniform_state(&self, rng: &mut RngStream) -> Option<CartPoleState> {
        let [x, xd, th, thd] = UNIFORM_RANGES.map(|(lo, hi)| rng.uniform(lo, hi));
        Some(CartPoleState::new(x, xd, th, thd))
    }

    fn has_uniform_sampler(&self) -> bool {
        true
    }

    fn state_values(&self, s: &CartPoleState) -> Vec<f64> {
        s.as_array().to_vec()
    }

    fn render(&self, s: &CartPoleState) -> serde_json::Value {
        json!({ "x": s.x, "theta": s.theta })
    }

    fn action_labels(&self) -> Vec<String> {
        vec!["left".into(), "right".into()]
    }
}
