use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MdpError;

/// Schema version for the serialized MDP document.
pub const MDP_SCHEMA_VERSION: u32 = 1;

/// Transition model of a finite MDP, indexed by `(state, action)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransitionModel {
    /// `next[s][a]` names the successor state.
    Deterministic { next: Vec<Vec<usize>> },
    /// `rows[s][a]` is a probability vector over successor states.
    Stochastic { rows: Vec<Vec<Vec<f64>>> },
}

/// A finite MDP with exact transition and reward tables.
///
/// Immutable after construction; all queries are pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    pub version: u32,
    pub state_count: usize,
    pub action_count: usize,
    pub gamma: f64,
    pub transitions: TransitionModel,
    /// `rewards[s][a]`, bounded by `r_max`.
    pub rewards: Vec<Vec<f64>>,
    /// Absorbing states: transition only to themselves with reward 0.
    pub terminals: Vec<usize>,
    pub seed: u64,
}

impl TabularMdp {
    pub fn new(
        transitions: TransitionModel,
        rewards: Vec<Vec<f64>>,
        terminals: Vec<usize>,
        gamma: f64,
        seed: u64,
    ) -> Result<Self, MdpError> {
        let state_count = rewards.len();
        let action_count = rewards.first().map_or(0, |r| r.len());
        let mdp = Self {
            version: MDP_SCHEMA_VERSION,
            state_count,
            action_count,
            gamma,
            transitions,
            rewards,
            terminals,
            seed,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn validate(&self) -> Result<(), MdpError> {
        if self.state_count == 0 || self.action_count == 0 {
            return Err(MdpError::Malformed("empty state or action space".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(MdpError::Malformed(format!("gamma {} not in [0, 1)", self.gamma)));
        }
        match &self.transitions {
            TransitionModel::Deterministic { next } => {
                if next.len() != self.state_count {
                    return Err(MdpError::Malformed("transition table row count mismatch".into()));
                }
                for (s, row) in next.iter().enumerate() {
                    if row.len() != self.action_count {
                        return Err(MdpError::Malformed(format!("state {s}: action count mismatch")));
                    }
                    for (a, &ns) in row.iter().enumerate() {
                        if ns >= self.state_count {
                            return Err(MdpError::Malformed(format!(
                                "transition ({s},{a}) -> {ns} out of range"
                            )));
                        }
                    }
                }
            }
            TransitionModel::Stochastic { rows } => {
                for (s, per_action) in rows.iter().enumerate() {
                    for (a, row) in per_action.iter().enumerate() {
                        let sum: f64 = row.iter().sum();
                        if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                            return Err(MdpError::Malformed(format!(
                                "transition row ({s},{a}) is not a distribution (sum {sum})"
                            )));
                        }
                    }
                }
            }
        }
        let r_max = self.r_max();
        for (s, row) in self.rewards.iter().enumerate() {
            for (a, &r) in row.iter().enumerate() {
                if !r.is_finite() || r.abs() > r_max + 1e-12 {
                    return Err(MdpError::Malformed(format!("reward ({s},{a}) = {r} out of bounds")));
                }
            }
        }
        for &t in &self.terminals {
            if t >= self.state_count {
                return Err(MdpError::Malformed(format!("terminal state {t} out of range")));
            }
            if self.rewards[t].iter().any(|&r| r != 0.0) {
                return Err(MdpError::Malformed(format!("terminal state {t} has nonzero reward")));
            }
            match &self.transitions {
                TransitionModel::Deterministic { next } => {
                    if next[t].iter().any(|&ns| ns != t) {
                        return Err(MdpError::Malformed(format!("terminal state {t} is not absorbing")));
                    }
                }
                TransitionModel::Stochastic { rows } => {
                    if rows[t].iter().any(|row| (row[t] - 1.0).abs() > 1e-9) {
                        return Err(MdpError::Malformed(format!("terminal state {t} is not absorbing")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Bound on `|reward(s, a)|` over all pairs (at least 1 so loss formulas stay meaningful).
    pub fn r_max(&self) -> f64 {
        self.rewards
            .iter()
            .flat_map(|row| row.iter().map(|r| r.abs()))
            .fold(1.0_f64, f64::max)
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminals.contains(&s)
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s][a]
    }

    /// Successor state for a deterministic model; the argmax-probability
    /// successor for a stochastic one (kept deterministic so searches replay).
    pub fn step(&self, s: usize, a: usize) -> Result<(usize, f64, bool), MdpError> {
        if s >= self.state_count || a >= self.action_count {
            return Err(MdpError::IllegalAction { state: s.to_string(), action: a });
        }
        let next = match &self.transitions {
            TransitionModel::Deterministic { next } => next[s][a],
            TransitionModel::Stochastic { rows } => rows[s][a]
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .map(|(i, _)| i)
                .unwrap(),
        };
        Ok((next, self.rewards[s][a], self.is_terminal(next)))
    }

    /// Probability of `s -> ns` under action `a`.
    pub fn transition_prob(&self, s: usize, a: usize, ns: usize) -> f64 {
        match &self.transitions {
            TransitionModel::Deterministic { next } => {
                if next[s][a] == ns {
                    1.0
                } else {
                    0.0
                }
            }
            TransitionModel::Stochastic { rows } => rows[s][a][ns],
        }
    }

    pub fn to_json(&self) -> Result<String, MdpError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, MdpError> {
        let mdp: Self = serde_json::from_str(text)?;
        mdp.validate()?;
        Ok(mdp)
    }
}

/// Builds a reproducible random MDP. Deterministic transitions by default;
/// see [`random_mdp_with`] for the stochastic variant.
///
/// Rewards are drawn in `[-1, 1]`; the last state is an absorbing terminal.
pub fn random_mdp(seed: u64, state_count: usize, action_count: usize, sparsity: f64) -> TabularMdp {
    random_mdp_with(seed, state_count, action_count, sparsity, false)
}

pub fn random_mdp_with(
    seed: u64,
    state_count: usize,
    action_count: usize,
    sparsity: f64,
    stochastic: bool,
) -> TabularMdp {
    assert!(state_count >= 2, "state_count must be at least 2");
    assert!(action_count >= 2, "action_count must be at least 2");
    assert!(sparsity > 0.0 && sparsity <= 1.0, "sparsity must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terminal = state_count - 1;
    // Transitions land in a sparsity-sized prefix of the state space (plus the
    // terminal), which concentrates structure and keeps trees overlapping.
    let reachable = ((state_count as f64 * sparsity).ceil() as usize).clamp(1, state_count);

    let rewards: Vec<Vec<f64>> = (0..state_count)
        .map(|s| {
            (0..action_count)
                .map(|_| if s == terminal { 0.0 } else { round6(rng.gen_range(-1.0..1.0)) })
                .collect()
        })
        .collect();

    let transitions = if stochastic {
        let rows = (0..state_count)
            .map(|s| {
                (0..action_count)
                    .map(|_| {
                        let mut row = vec![0.0; state_count];
                        if s == terminal {
                            row[terminal] = 1.0;
                        } else {
                            let mut total = 0.0;
                            for item in row.iter_mut().take(reachable) {
                                let w: f64 = rng.gen_range(0.01..1.0);
                                *item = w;
                                total += w;
                            }
                            for item in row.iter_mut().take(reachable) {
                                *item /= total;
                            }
                            // Exact renormalization so the row sums to 1.
                            let sum: f64 = row.iter().sum();
                            row[0] += 1.0 - sum;
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        TransitionModel::Stochastic { rows }
    } else {
        let next = (0..state_count)
            .map(|s| {
                (0..action_count)
                    .map(|_| {
                        if s == terminal {
                            terminal
                        } else if rng.gen_bool(0.1) {
                            terminal
                        } else {
                            rng.gen_range(0..reachable)
                        }
                    })
                    .collect()
            })
            .collect();
        TransitionModel::Deterministic { next }
    };

    TabularMdp::new(transitions, rewards, vec![terminal], 0.9, seed)
        .expect("generated mdp is well-formed")
}

/// Builds an MDP whose root actions come in mirrored pairs: action `a` and
/// `a + action_count/2` lead into two disjoint, structurally identical
/// subchains, so the corresponding successor states have identical `Q*` rows.
///
/// Layout: state 0 is the root, states `1..=m` are copy A, `m+1..=2m` are
/// copy B, and `2m+1` is the shared absorbing terminal.
pub fn symmetric_mdp(seed: u64, core_states: usize, action_count: usize) -> TabularMdp {
    assert!(core_states >= 2);
    assert!(action_count >= 2 && action_count % 2 == 0, "action_count must be even");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = core_states;
    let state_count = 2 * m + 2;
    let terminal = 2 * m + 1;
    let half = action_count / 2;

    // Core dynamics over 0..m (local indices), embedded twice.
    let core_next: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            (0..action_count)
                .map(|_| if rng.gen_bool(0.25) { m } else { rng.gen_range(0..m) })
                .collect()
        })
        .collect();
    let core_reward: Vec<Vec<f64>> =
        (0..m).map(|_| (0..action_count).map(|_| round6(rng.gen_range(-1.0..1.0))).collect()).collect();
    let entry: Vec<usize> = (0..half).map(|_| rng.gen_range(0..m)).collect();
    let entry_reward: Vec<f64> = (0..half).map(|_| round6(rng.gen_range(-1.0..1.0))).collect();

    let embed = |local: usize, copy: usize| -> usize {
        if local == m {
            terminal
        } else {
            1 + copy * m + local
        }
    };

    let mut next = vec![vec![0; action_count]; state_count];
    let mut rewards = vec![vec![0.0; action_count]; state_count];
    for a in 0..action_count {
        let (pair, copy) = if a < half { (a, 0) } else { (a - half, 1) };
        next[0][a] = embed(entry[pair], copy);
        rewards[0][a] = entry_reward[pair];
    }
    for copy in 0..2 {
        for local in 0..m {
            let s = 1 + copy * m + local;
            for a in 0..action_count {
                next[s][a] = embed(core_next[local][a], copy);
                rewards[s][a] = core_reward[local][a];
            }
        }
    }
    next[terminal] = vec![terminal; action_count];

    TabularMdp::new(TransitionModel::Deterministic { next }, rewards, vec![terminal], 0.9, seed)
        .expect("generated mdp is well-formed")
}

/// Rounds to 6 decimals so generated tables serialize identically across
/// platforms regardless of float formatting.
fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}
