use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::RunMetrics;
use super::search::{ptsa_search, SearchEvent};
use super::{mix_seed, HarnessError};
use crate::model::Model;
use crate::tree::SearchConfig;

/// One move of an episode: the search metrics behind it and the reward it
/// earned, from the first player's perspective.
#[derive(Debug, Clone)]
pub struct MoveRecord {
    pub move_index: usize,
    pub action: usize,
    pub reward: f64,
    pub metrics: RunMetrics,
    pub events: Vec<SearchEvent>,
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub moves: Vec<MoveRecord>,
    pub episode_return: f64,
}

/// Plays one episode with a fresh search tree per move, so every timestep
/// re-evaluates node values from scratch and no aggregation decision
/// outlives the move that made it.
///
/// Action selection: two-player games take the argmax of the visit policy;
/// single-player tasks sample at temperature 1 for the first ten moves and
/// argmax afterwards. `episode_seed` separates episodes; per-move search
/// seeds derive from it.
pub fn run_episode<M: Model>(
    model: &M,
    start: M::State,
    search: &SearchConfig,
    episode_seed: u64,
    move_cap: usize,
) -> Result<EpisodeResult, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(episode_seed, 0x5eed));
    let mut state = start;
    let mut moves = Vec::new();
    let mut episode_return = 0.0;

    for move_index in 0..move_cap {
        if model.is_terminal(&state) {
            break;
        }
        let mut move_search = search.clone();
        move_search.seed = mix_seed(episode_seed, 1 + move_index as u64);
        let outcome = ptsa_search(model, state.clone(), &move_search)?;

        let greedy = model.two_player() || move_index >= 10;
        let action = select_action(&outcome.policy, greedy, &mut rng);
        let prediction = model.predict(&state, action)?;
        // Two-player rewards arrive from the mover's perspective; fold them
        // back to the first player's.
        let signed = if model.two_player() && move_index % 2 == 1 {
            -prediction.reward
        } else {
            prediction.reward
        };
        episode_return += signed;
        moves.push(MoveRecord {
            move_index,
            action,
            reward: signed,
            metrics: outcome.metrics,
            events: outcome.events,
        });
        if prediction.terminal {
            break;
        }
        state = prediction.next;
    }

    Ok(EpisodeResult { moves, episode_return })
}

/// Picks an action from a visit policy: argmax (ties to the lowest action)
/// or a proportional sample at temperature 1.
pub fn select_action<R: Rng>(policy: &[(usize, f64)], greedy: bool, rng: &mut R) -> usize {
    debug_assert!(!policy.is_empty());
    if greedy {
        let mut best = policy[0];
        for &(action, p) in &policy[1..] {
            if p > best.1 {
                best = (action, p);
            }
        }
        return best.0;
    }
    let total: f64 = policy.iter().map(|(_, p)| p).sum();
    let mut draw = rng.gen_range(0.0..total.max(f64::MIN_POSITIVE));
    for &(action, p) in policy {
        draw -= p;
        if draw <= 0.0 {
            return action;
        }
    }
    policy.last().unwrap().0
}
