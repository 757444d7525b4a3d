//! Finite environments with exact dynamics and a value-iteration oracle.
//!
//! Everything in this module is deterministic given its inputs. The tabular
//! MDP supplies exact `Q*`/`V*` tables that the abstraction predicates
//! reference; the Gomoku and CartPole environments are small-scale search
//! benchmarks with reproducible dynamics.

mod cartpole;
mod gomoku;
mod tabular;
mod value_iteration;

pub use cartpole::{CartPoleDiscrete, CartPoleState};
pub use gomoku::{Cell, GomokuState, Player};
pub use tabular::{random_mdp, symmetric_mdp, TabularMdp, TransitionModel};
pub use value_iteration::{value_iteration, ValueTables};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("illegal action {action} in state {state}")]
    IllegalAction { state: String, action: usize },
    #[error("value iteration did not converge within {sweeps} sweeps (residual {residual})")]
    NonConvergence { sweeps: usize, residual: f64 },
    #[error("malformed mdp: {0}")]
    Malformed(String),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}
