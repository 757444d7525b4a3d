use serde::{Deserialize, Serialize};

use super::{MdpError, TabularMdp, TransitionModel};

/// Cap on value-iteration sweeps; hitting it signals a malformed MDP.
const MAX_SWEEPS: usize = 100_000;

/// Exact `V*` / `Q*` tables for a [`TabularMdp`], with the final sup-norm
/// Bellman residual recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTables {
    pub v_star: Vec<f64>,
    /// `q_star[s][a]`.
    pub q_star: Vec<Vec<f64>>,
    pub residual: f64,
}

impl ValueTables {
    pub fn v(&self, s: usize) -> f64 {
        self.v_star[s]
    }

    pub fn q_row(&self, s: usize) -> &[f64] {
        &self.q_star[s]
    }

    /// Greedy (optimal) action at `s`; ties break to the lowest index.
    pub fn optimal_action(&self, s: usize) -> usize {
        let row = &self.q_star[s];
        let mut best = 0;
        for (a, &q) in row.iter().enumerate() {
            if q > row[best] {
                best = a;
            }
        }
        best
    }
}

/// Solves the MDP by sweeping the Bellman optimality operator until the
/// sup-norm residual falls below `tol`.
///
/// The residual contracts by `gamma` per sweep, so divergence within the
/// sweep cap indicates a malformed model.
pub fn value_iteration(mdp: &TabularMdp, tol: f64) -> Result<ValueTables, MdpError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = mdp.state_count;
    let mut v = vec![0.0_f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let (next_v, delta) = bellman_sweep(mdp, &v);
        v = next_v;
        residual = delta;
        if residual <= tol {
            let q_star = q_from_v(mdp, &v);
            return Ok(ValueTables { v_star: v, q_star, residual });
        }
    }
    Err(MdpError::NonConvergence { sweeps: MAX_SWEEPS, residual })
}

/// One application of the Bellman optimality operator; returns the updated
/// values and the sup-norm change.
pub fn bellman_sweep(mdp: &TabularMdp, v: &[f64]) -> (Vec<f64>, f64) {
    let q = q_from_v(mdp, v);
    let mut next = vec![0.0; v.len()];
    let mut delta = 0.0_f64;
    for s in 0..mdp.state_count {
        let best = q[s].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let val = if mdp.is_terminal(s) { 0.0 } else { best };
        delta = delta.max((val - v[s]).abs());
        next[s] = val;
    }
    (next, delta)
}

fn q_from_v(mdp: &TabularMdp, v: &[f64]) -> Vec<Vec<f64>> {
    (0..mdp.state_count)
        .map(|s| {
            (0..mdp.action_count)
                .map(|a| {
                    let expected_next = match &mdp.transitions {
                        TransitionModel::Deterministic { next } => v[next[s][a]],
                        TransitionModel::Stochastic { rows } => {
                            rows[s][a].iter().zip(v).map(|(p, vn)| p * vn).sum()
                        }
                    };
                    mdp.reward(s, a) + mdp.gamma * expected_next
                })
                .collect()
        })
        .collect()
}
