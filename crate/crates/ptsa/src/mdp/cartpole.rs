use serde::{Deserialize, Serialize};

use super::MdpError;

/// Physical state of the cart-pole, plus the step counter that drives the
/// episode limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub steps: usize,
}

impl CartPoleState {
    /// Stable 64-bit key of the state, used to seed rollouts.
    pub fn key(&self) -> u64 {
        let mut key = self.steps as u64;
        for bits in [self.x.to_bits(), self.x_dot.to_bits(), self.theta.to_bits(), self.theta_dot.to_bits()] {
            key = key.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(bits);
        }
        key
    }
}

impl Default for CartPoleState {
    fn default() -> Self {
        Self { x: 0.0, x_dot: 0.0, theta: 0.02, theta_dot: 0.0, steps: 0 }
    }
}

/// Frictionless inverted pendulum with the action space discretized onto a
/// force interval. Explicit Euler at a fixed timestep keeps trajectories
/// bit-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartPoleDiscrete {
    pub action_count: usize,
    pub force_min: f64,
    pub force_max: f64,
    pub step_limit: usize,
}

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const POLE_HALF_LENGTH: f64 = 0.5;
const TAU: f64 = 0.02;
const X_LIMIT: f64 = 2.4;
const THETA_LIMIT: f64 = 12.0 * std::f64::consts::PI / 180.0;

impl CartPoleDiscrete {
    pub fn new(action_count: usize) -> Self {
        assert!(action_count >= 2);
        Self { action_count, force_min: -10.0, force_max: 10.0, step_limit: 200 }
    }

    /// Affine action-to-force map; endpoints hit the interval bounds exactly.
    pub fn force(&self, action: usize) -> f64 {
        let t = action as f64 / (self.action_count - 1) as f64;
        self.force_min + t * (self.force_max - self.force_min)
    }

    pub fn is_terminal(&self, s: &CartPoleState) -> bool {
        s.x.abs() > X_LIMIT || s.theta.abs() > THETA_LIMIT || s.steps >= self.step_limit
    }

    pub fn legal_actions(&self, s: &CartPoleState) -> Vec<usize> {
        if self.is_terminal(s) {
            Vec::new()
        } else {
            (0..self.action_count).collect()
        }
    }

    /// One Euler step under the force mapped from `action`. Survival reward
    /// convention: 1 per step while within bounds.
    pub fn step(&self, s: &CartPoleState, action: usize) -> Result<(CartPoleState, f64, bool), MdpError> {
        if action >= self.action_count || self.is_terminal(s) {
            return Err(MdpError::IllegalAction { state: format!("{s:?}"), action });
        }
        let force = self.force(action);
        let total_mass = MASS_CART + MASS_POLE;
        let polemass_length = MASS_POLE * POLE_HALF_LENGTH;
        let (sin_t, cos_t) = s.theta.sin_cos();
        let temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
        let theta_acc = (GRAVITY * sin_t - cos_t * temp)
            / (POLE_HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos_t * cos_t / total_mass));
        let x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;
        let next = CartPoleState {
            x: s.x + TAU * s.x_dot,
            x_dot: s.x_dot + TAU * x_acc,
            theta: s.theta + TAU * s.theta_dot,
            theta_dot: s.theta_dot + TAU * theta_acc,
            steps: s.steps + 1,
        };
        let terminal = self.is_terminal(&next);
        Ok((next, 1.0, terminal))
    }
}
