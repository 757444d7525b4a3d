use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::{EnvironmentSpec, ModelSpec, RunConfig};
use super::episode::run_episode;
use super::{mix_seed, HarnessError};
use crate::abstraction::AbstractionFn;
use crate::mdp::{random_mdp, symmetric_mdp, value_iteration, CartPoleDiscrete, CartPoleState, GomokuState};
use crate::model::{CartPoleOracle, GomokuOracle, Model, NoisyModel, TabularOracle};

pub const SPEEDUP_SCHEMA_VERSION: u32 = 1;

/// A speedup study: one base task, a set of abstractions to race against the
/// no-abstraction baseline, and the target the episode return must reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupStudyConfig {
    /// Base run; its configured abstraction is ignored.
    pub base: RunConfig,
    /// Abstractions to measure. `None` entries report the baseline itself.
    pub abstractions: Vec<Option<AbstractionFn>>,
    /// Seeds to average over; five or more gives the reported deviation meaning.
    pub seeds: Vec<u64>,
    pub target_return: f64,
    pub max_episodes: usize,
}

/// One abstraction's row: wall-time speedup against the baseline, episodes
/// needed to hit the target, and how many runs never reached it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub abstraction: String,
    /// Mean of per-seed `baseline wall time / this wall time` over seed
    /// pairs where both runs reached the target.
    pub mean_speedup: f64,
    pub std_speedup: f64,
    pub mean_episodes_to_target: f64,
    pub mean_wall_ms: f64,
    /// Runs that never reached the target within the episode budget. They
    /// are excluded from the ratio but reported, never dropped silently.
    pub censored_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    pub schema_version: u32,
    pub target_return: f64,
    pub seeds: usize,
    pub rows: Vec<SpeedupRow>,
}

#[derive(Debug, Clone, Copy)]
struct Measurement {
    wall: Duration,
    episodes: usize,
    reached: bool,
}

/// Races each abstraction against the no-abstraction baseline on the same
/// task and seeds, reporting wall-time ratios to the target return.
pub fn speedup_study(study: &SpeedupStudyConfig) -> Result<SpeedupReport, HarnessError> {
    if study.seeds.is_empty() {
        return Err(HarnessError::Config("speedup study needs at least one seed".into()));
    }
    study.base.validate()?;

    let baseline: Vec<Measurement> = study
        .seeds
        .iter()
        .map(|&seed| measure(&study.base, None, seed, study.target_return, study.max_episodes))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(study.abstractions.len());
    for abstraction in &study.abstractions {
        let runs: Vec<Measurement> = study
            .seeds
            .iter()
            .map(|&seed| {
                measure(&study.base, abstraction.clone(), seed, study.target_return, study.max_episodes)
            })
            .collect::<Result<_, _>>()?;

        let ratios: Vec<f64> = baseline
            .iter()
            .zip(&runs)
            .filter(|(b, r)| b.reached && r.reached)
            .map(|(b, r)| b.wall.as_secs_f64() / r.wall.as_secs_f64().max(f64::MIN_POSITIVE))
            .collect();
        let mean = if ratios.is_empty() { f64::NAN } else { ratios.iter().sum::<f64>() / ratios.len() as f64 };
        let std = if ratios.len() < 2 {
            0.0
        } else {
            let var =
                ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (ratios.len() - 1) as f64;
            var.sqrt()
        };
        rows.push(SpeedupRow {
            abstraction: abstraction
                .as_ref()
                .map_or_else(|| "none".to_string(), |a| a.kind.name().to_string()),
            mean_speedup: mean,
            std_speedup: std,
            mean_episodes_to_target: runs.iter().map(|r| r.episodes as f64).sum::<f64>()
                / runs.len() as f64,
            mean_wall_ms: runs.iter().map(|r| r.wall.as_secs_f64() * 1e3).sum::<f64>()
                / runs.len() as f64,
            censored_runs: runs.iter().filter(|r| !r.reached).count(),
        });
    }

    Ok(SpeedupReport {
        schema_version: SPEEDUP_SCHEMA_VERSION,
        target_return: study.target_return,
        seeds: study.seeds.len(),
        rows,
    })
}

/// Plays episodes until the return reaches the target, timing the loop.
fn measure(
    base: &RunConfig,
    abstraction: Option<AbstractionFn>,
    seed: u64,
    target: f64,
    max_episodes: usize,
) -> Result<Measurement, HarnessError> {
    let mut config = base.clone();
    config.search.seed = seed;
    config.search.abstraction = abstraction;
    match &config.environment {
        EnvironmentSpec::RandomMdp { seed, state_count, action_count, sparsity } => {
            let mdp = random_mdp(*seed, *state_count, *action_count, *sparsity);
            tabular_measure(mdp, &config, target, max_episodes)
        }
        EnvironmentSpec::SymmetricMdp { seed, core_states, action_count } => {
            let mdp = symmetric_mdp(*seed, *core_states, *action_count);
            tabular_measure(mdp, &config, target, max_episodes)
        }
        EnvironmentSpec::Gomoku { size, win_length } => {
            let oracle = GomokuOracle::new(config.search.seed);
            let start = GomokuState::new(*size, *win_length);
            episodes_to_target(&oracle, || start.clone(), &config, target, max_episodes)
        }
        EnvironmentSpec::Cartpole { actions } => {
            let oracle = CartPoleOracle::new(CartPoleDiscrete::new(*actions), config.search.seed);
            episodes_to_target(&oracle, CartPoleState::default, &config, target, max_episodes)
        }
    }
}

fn tabular_measure(
    mdp: crate::mdp::TabularMdp,
    config: &RunConfig,
    target: f64,
    max_episodes: usize,
) -> Result<Measurement, HarnessError> {
    let tables = value_iteration(&mdp, 1e-10)?;
    let oracle = TabularOracle::new(mdp, tables);
    match &config.model {
        ModelSpec::Oracle => episodes_to_target(&oracle, || 0usize, config, target, max_episodes),
        ModelSpec::Noisy { value_sigma, prior_sigma, seed } => {
            let noisy = NoisyModel::new(oracle, *value_sigma, *prior_sigma, *seed);
            episodes_to_target(&noisy, || 0usize, config, target, max_episodes)
        }
    }
}

fn episodes_to_target<M: Model>(
    model: &M,
    start: impl Fn() -> M::State,
    config: &RunConfig,
    target: f64,
    max_episodes: usize,
) -> Result<Measurement, HarnessError> {
    let clock = Instant::now();
    for episode in 0..max_episodes {
        let episode_seed = mix_seed(config.search.seed, episode as u64);
        let result = run_episode(model, start(), &config.search, episode_seed, config.move_cap())?;
        if result.episode_return >= target {
            return Ok(Measurement { wall: clock.elapsed(), episodes: episode + 1, reached: true });
        }
    }
    Ok(Measurement { wall: clock.elapsed(), episodes: max_episodes, reached: false })
}
