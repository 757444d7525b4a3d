//! Stand-ins for learned dynamics/policy/value networks: exact oracles for
//! the three environments, plus a seeded noise wrapper that emulates
//! imperfect network predictions.
//!
//! Oracles are immutable and pure: every prediction is a function of
//! `(state, action, seed)`, so repeated queries return identical results
//! and whole searches replay bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::abstraction::{eval_predicate_rows, softmax_q, AbstractionKind};
use crate::mdp::{CartPoleDiscrete, CartPoleState, GomokuState, MdpError, TabularMdp, ValueTables};

/// One model query along an edge `(state, action)`.
#[derive(Debug, Clone)]
pub struct Prediction<S> {
    pub next: S,
    pub reward: f64,
    /// Value-to-go estimate for `next`, from the perspective of the player
    /// who moved into it (identical to the state value for single-player
    /// environments).
    pub value: f64,
    pub terminal: bool,
    /// Legal actions at `next`.
    pub legal: Vec<usize>,
    /// Policy priors aligned with `legal`.
    pub priors: Vec<f64>,
}

/// The prediction interface the search consumes in place of MuZero's
/// dynamics, policy, and value networks.
pub trait Model {
    type State: Clone;

    fn gamma(&self) -> f64;
    fn two_player(&self) -> bool {
        false
    }
    fn is_terminal(&self, s: &Self::State) -> bool;
    fn legal_actions(&self, s: &Self::State) -> Vec<usize>;
    /// Priors over `legal_actions(s)`, used to expand the root.
    fn priors(&self, s: &Self::State) -> Vec<f64>;
    fn predict(&self, s: &Self::State, a: usize) -> Result<Prediction<Self::State>, MdpError>;
    /// Index into value tables, when the environment is tabular.
    fn state_index(&self, _s: &Self::State) -> Option<usize> {
        None
    }
    /// Model-estimated Q row over all actions, when available.
    fn q_row(&self, _s: &Self::State) -> Option<Vec<f64>> {
        None
    }
    /// Bound on any backed-up return, when known.
    fn value_bound(&self) -> Option<f64> {
        None
    }
}

/// Exact oracle for a tabular MDP: true dynamics, `V*` values, and
/// softmax-of-`Q*` priors.
#[derive(Debug, Clone)]
pub struct TabularOracle {
    pub mdp: TabularMdp,
    pub tables: ValueTables,
}

impl TabularOracle {
    pub fn new(mdp: TabularMdp, tables: ValueTables) -> Self {
        Self { mdp, tables }
    }
}

impl Model for TabularOracle {
    type State = usize;

    fn gamma(&self) -> f64 {
        self.mdp.gamma
    }

    fn is_terminal(&self, s: &usize) -> bool {
        self.mdp.is_terminal(*s)
    }

    fn legal_actions(&self, s: &usize) -> Vec<usize> {
        if self.mdp.is_terminal(*s) {
            Vec::new()
        } else {
            (0..self.mdp.action_count).collect()
        }
    }

    fn priors(&self, s: &usize) -> Vec<f64> {
        let support: Vec<usize> = (0..self.mdp.action_count).collect();
        softmax_q(&support, self.tables.q_row(*s)).expect("non-empty action set").probs
    }

    fn predict(&self, s: &usize, a: usize) -> Result<Prediction<usize>, MdpError> {
        let (next, reward, terminal) = self.mdp.step(*s, a)?;
        let legal = self.legal_actions(&next);
        let priors = if terminal { Vec::new() } else { self.priors(&next) };
        Ok(Prediction { next, reward, value: self.tables.v(next), terminal, legal, priors })
    }

    fn state_index(&self, s: &usize) -> Option<usize> {
        Some(*s)
    }

    fn q_row(&self, s: &usize) -> Option<Vec<f64>> {
        Some(self.tables.q_row(*s).to_vec())
    }

    fn value_bound(&self) -> Option<f64> {
        Some(self.mdp.r_max() / (1.0 - self.mdp.gamma) + 1e-6)
    }
}

/// Wraps a tabular oracle with deterministic per-`(state, action, seed)`
/// Gaussian noise on values (and Q rows) and logit-space noise on priors,
/// emulating stable-but-wrong network outputs.
#[derive(Debug, Clone)]
pub struct NoisyModel {
    pub inner: TabularOracle,
    pub value_sigma: f64,
    pub prior_sigma: f64,
    pub seed: u64,
}

impl NoisyModel {
    pub fn new(inner: TabularOracle, value_sigma: f64, prior_sigma: f64, seed: u64) -> Self {
        assert!(value_sigma >= 0.0 && prior_sigma >= 0.0);
        Self { inner, value_sigma, prior_sigma, seed }
    }

    fn gauss(&self, state: usize, action: usize, tag: u64) -> f64 {
        let key = splitmix(splitmix(splitmix(self.seed ^ tag, state as u64), action as u64), tag);
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.sample(StandardNormal)
    }

    fn perturbed_priors(&self, state: usize, priors: Vec<f64>, legal: &[usize]) -> Vec<f64> {
        if self.prior_sigma == 0.0 || priors.is_empty() {
            return priors;
        }
        let logits: Vec<f64> = priors
            .iter()
            .zip(legal)
            .map(|(p, &a)| p.max(1e-12).ln() + self.prior_sigma * self.gauss(state, a, 2))
            .collect();
        softmax_q(legal, &logits).expect("non-empty support").probs
    }
}

impl Model for NoisyModel {
    type State = usize;

    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    fn is_terminal(&self, s: &usize) -> bool {
        self.inner.is_terminal(s)
    }

    fn legal_actions(&self, s: &usize) -> Vec<usize> {
        self.inner.legal_actions(s)
    }

    fn priors(&self, s: &usize) -> Vec<f64> {
        let legal = self.inner.legal_actions(s);
        self.perturbed_priors(*s, self.inner.priors(s), &legal)
    }

    fn predict(&self, s: &usize, a: usize) -> Result<Prediction<usize>, MdpError> {
        let mut p = self.inner.predict(s, a)?;
        if self.value_sigma > 0.0 {
            p.value += self.value_sigma * self.gauss(*s, a, 1);
        }
        p.priors = self.perturbed_priors(p.next, p.priors, &p.legal);
        Ok(p)
    }

    fn state_index(&self, s: &usize) -> Option<usize> {
        Some(*s)
    }

    /// Q-row estimate under the same value-noise stream the predictions use.
    fn q_row(&self, s: &usize) -> Option<Vec<f64>> {
        let exact = self.inner.q_row(s)?;
        if self.value_sigma == 0.0 {
            return Some(exact);
        }
        Some(
            exact
                .iter()
                .enumerate()
                .map(|(a, q)| q + self.inner.gamma() * self.value_sigma * self.gauss(*s, a, 1))
                .collect(),
        )
    }

    fn value_bound(&self) -> Option<f64> {
        // Gaussian noise is unbounded; no finite bound to assert.
        None
    }
}

/// Gomoku oracle: exact rules, uniform priors, and value estimates from a
/// handful of seeded uniform-random rollouts.
#[derive(Debug, Clone)]
pub struct GomokuOracle {
    pub seed: u64,
    pub rollouts: usize,
    pub rollout_depth: usize,
}

impl GomokuOracle {
    pub fn new(seed: u64) -> Self {
        Self { seed, rollouts: 4, rollout_depth: 20 }
    }

    /// Mean rollout outcome from `state`, scored for `perspective_of` (the
    /// player who just moved).
    fn rollout_value(&self, state: &GomokuState, perspective_of: crate::mdp::Player) -> f64 {
        let mut total = 0.0;
        for i in 0..self.rollouts {
            let key = splitmix(splitmix(self.seed, state.board_key()), i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            let mut cur = state.clone();
            for _ in 0..self.rollout_depth {
                if cur.is_terminal() {
                    break;
                }
                let legal = cur.legal_actions();
                let action = legal[rng.gen_range(0..legal.len())];
                (cur, _, _) = cur.place(action).expect("rollout action is legal");
            }
            total += match cur.winner() {
                Some(w) if w == perspective_of => 1.0,
                Some(_) => -1.0,
                None => 0.0,
            };
        }
        total / self.rollouts as f64
    }
}

impl Model for GomokuOracle {
    type State = GomokuState;

    fn gamma(&self) -> f64 {
        1.0
    }

    fn two_player(&self) -> bool {
        true
    }

    fn is_terminal(&self, s: &GomokuState) -> bool {
        s.is_terminal()
    }

    fn legal_actions(&self, s: &GomokuState) -> Vec<usize> {
        s.legal_actions()
    }

    fn priors(&self, s: &GomokuState) -> Vec<f64> {
        let n = s.legal_actions().len();
        vec![1.0 / n as f64; n]
    }

    fn predict(&self, s: &GomokuState, a: usize) -> Result<Prediction<GomokuState>, MdpError> {
        let mover = s.to_move;
        let (next, reward, terminal) = s.place(a)?;
        let legal = next.legal_actions();
        let priors = if legal.is_empty() { Vec::new() } else { vec![1.0 / legal.len() as f64; legal.len()] };
        let value = if terminal { 0.0 } else { self.rollout_value(&next, mover) };
        Ok(Prediction { next, reward, value, terminal, legal, priors })
    }

    fn value_bound(&self) -> Option<f64> {
        Some(1.0 + 1e-9)
    }
}

/// CartPole oracle: exact Euler dynamics, uniform priors, and discounted
/// random-rollout value estimates.
#[derive(Debug, Clone)]
pub struct CartPoleOracle {
    pub env: CartPoleDiscrete,
    pub gamma: f64,
    pub seed: u64,
    pub rollouts: usize,
    pub rollout_depth: usize,
}

impl CartPoleOracle {
    pub fn new(env: CartPoleDiscrete, seed: u64) -> Self {
        Self { env, gamma: 0.997, seed, rollouts: 4, rollout_depth: 20 }
    }

    fn rollout_value(&self, state: &CartPoleState) -> f64 {
        let mut total = 0.0;
        for i in 0..self.rollouts {
            let key = splitmix(splitmix(self.seed, state.key()), i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            let mut cur = *state;
            let mut ret = 0.0;
            let mut discount = 1.0;
            for _ in 0..self.rollout_depth {
                if self.env.is_terminal(&cur) {
                    break;
                }
                let action = rng.gen_range(0..self.env.action_count);
                let (next, reward, _) = self.env.step(&cur, action).expect("rollout action is legal");
                ret += discount * reward;
                discount *= self.gamma;
                cur = next;
            }
            total += ret;
        }
        total / self.rollouts as f64
    }
}

impl Model for CartPoleOracle {
    type State = CartPoleState;

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn is_terminal(&self, s: &CartPoleState) -> bool {
        self.env.is_terminal(s)
    }

    fn legal_actions(&self, s: &CartPoleState) -> Vec<usize> {
        self.env.legal_actions(s)
    }

    fn priors(&self, s: &CartPoleState) -> Vec<f64> {
        let n = self.env.legal_actions(s).len();
        vec![1.0 / n as f64; n]
    }

    fn predict(&self, s: &CartPoleState, a: usize) -> Result<Prediction<CartPoleState>, MdpError> {
        let (next, reward, terminal) = self.env.step(s, a)?;
        let legal = self.env.legal_actions(&next);
        let priors = if legal.is_empty() { Vec::new() } else { vec![1.0 / legal.len() as f64; legal.len()] };
        let value = if terminal { 0.0 } else { self.rollout_value(&next) };
        Ok(Prediction { next, reward, value, terminal, legal, priors })
    }

    fn value_bound(&self) -> Option<f64> {
        Some(1.0 / (1.0 - self.gamma) + 1e-6)
    }
}

/// Fraction of decided aggregation events whose state pairs violate the
/// exact optimal-action predicate under true values: the operational
/// "incorrect aggregation" measure. Events are given as the per-depth state
/// pairs of their two paths; an event is a mistake when any depth pair
/// disagrees on the optimal action or optimal value.
///
/// Returns `(rate, event_count)`; zero events yield rate 0 with the count
/// flagging the vacuous denominator.
pub fn incorrect_aggregation_rate<'a, I>(events: I, tables: &ValueTables) -> (f64, usize)
where
    I: IntoIterator<Item = &'a Vec<(usize, usize)>>,
{
    let mut total = 0usize;
    let mut mistakes = 0usize;
    for pairs in events {
        total += 1;
        let bad = pairs.iter().any(|&(sa, sb)| {
            !eval_predicate_rows(tables.q_row(sa), tables.q_row(sb), &AbstractionKind::PhiAStar)
        });
        if bad {
            mistakes += 1;
        }
    }
    if total == 0 {
        (0.0, 0)
    } else {
        (mistakes as f64 / total as f64, total)
    }
}

fn splitmix(seed: u64, x: u64) -> u64 {
    let mut z = seed.wrapping_add(x).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
