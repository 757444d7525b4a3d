use super::config::{EnvironmentSpec, ModelSpec, RunConfig};
use super::episode::run_episode;
use super::metrics::{emit_metrics, SearchRecord, METRICS_SCHEMA_VERSION};
use super::search::{ptsa_search, SearchEvent};
use super::{mix_seed, HarnessError};
use crate::abstraction::{error_bound, loss_bound};
use crate::mdp::{
    random_mdp, symmetric_mdp, value_iteration, CartPoleDiscrete, CartPoleState, GomokuState,
    TabularMdp,
};
use crate::model::{CartPoleOracle, GomokuOracle, Model, NoisyModel, TabularOracle};

/// Everything a run produces before emission: flat per-move records, episode
/// returns, and every aggregation event across all searches.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<SearchRecord>,
    pub episode_returns: Vec<f64>,
    pub events: Vec<SearchEvent>,
}

/// Executes a full run per the config and, when an output path is set,
/// writes the `.jsonl` / `.csv` / `.report.json` triple.
pub fn run(config: &RunConfig) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let output = match &config.environment {
        EnvironmentSpec::RandomMdp { seed, state_count, action_count, sparsity } => {
            tabular_run(random_mdp(*seed, *state_count, *action_count, *sparsity), config)?
        }
        EnvironmentSpec::SymmetricMdp { seed, core_states, action_count } => {
            tabular_run(symmetric_mdp(*seed, *core_states, *action_count), config)?
        }
        EnvironmentSpec::Gomoku { size, win_length } => {
            let oracle = GomokuOracle::new(config.search.seed);
            run_episodes(&oracle, || GomokuState::new(*size, *win_length), config, None)?
        }
        EnvironmentSpec::Cartpole { actions } => {
            let oracle = CartPoleOracle::new(CartPoleDiscrete::new(*actions), config.search.seed);
            run_episodes(&oracle, CartPoleState::default, config, None)?
        }
    };
    if let Some(base) = &config.output_path {
        emit_metrics(&output.records, base)?;
    }
    Ok(output)
}

/// Runs one search with `simulations` overridden and returns the tree's
/// diagnostic JSON.
pub fn dump_tree(config: &RunConfig, simulations: usize) -> Result<String, HarnessError> {
    config.validate()?;
    let mut search = config.search.clone();
    search.simulations = simulations;
    match &config.environment {
        EnvironmentSpec::RandomMdp { seed, state_count, action_count, sparsity } => {
            let mdp = random_mdp(*seed, *state_count, *action_count, *sparsity);
            tabular_dump(mdp, config, &search)
        }
        EnvironmentSpec::SymmetricMdp { seed, core_states, action_count } => {
            let mdp = symmetric_mdp(*seed, *core_states, *action_count);
            tabular_dump(mdp, config, &search)
        }
        EnvironmentSpec::Gomoku { size, win_length } => {
            let oracle = GomokuOracle::new(config.search.seed);
            let outcome = ptsa_search(&oracle, GomokuState::new(*size, *win_length), &search)?;
            Ok(outcome.tree.to_diagnostic_json())
        }
        EnvironmentSpec::Cartpole { actions } => {
            let oracle = CartPoleOracle::new(CartPoleDiscrete::new(*actions), config.search.seed);
            let outcome = ptsa_search(&oracle, CartPoleState::default(), &search)?;
            Ok(outcome.tree.to_diagnostic_json())
        }
    }
}

fn tabular_run(mdp: TabularMdp, config: &RunConfig) -> Result<RunOutput, HarnessError> {
    let bound = tabular_error_bound(config, &mdp);
    let tables = value_iteration(&mdp, 1e-10)?;
    let oracle = TabularOracle::new(mdp, tables);
    match &config.model {
        ModelSpec::Oracle => run_episodes(&oracle, || 0usize, config, bound),
        ModelSpec::Noisy { value_sigma, prior_sigma, seed } => {
            let noisy = NoisyModel::new(oracle, *value_sigma, *prior_sigma, *seed);
            run_episodes(&noisy, || 0usize, config, bound)
        }
    }
}

fn tabular_dump(
    mdp: TabularMdp,
    config: &RunConfig,
    search: &crate::tree::SearchConfig,
) -> Result<String, HarnessError> {
    let tables = value_iteration(&mdp, 1e-10)?;
    let oracle = TabularOracle::new(mdp, tables);
    let outcome = match &config.model {
        ModelSpec::Oracle => ptsa_search(&oracle, 0usize, search)?,
        ModelSpec::Noisy { value_sigma, prior_sigma, seed } => {
            let noisy = NoisyModel::new(oracle, *value_sigma, *prior_sigma, *seed);
            ptsa_search(&noisy, 0usize, search)?
        }
    };
    Ok(outcome.tree.to_diagnostic_json())
}

/// Closed-form aggregation-error bound of the configured predicate on a
/// tabular task, when one exists.
fn tabular_error_bound(config: &RunConfig, mdp: &TabularMdp) -> Option<f64> {
    let abstraction = config.search.abstraction.as_ref()?;
    let zeta = loss_bound(&abstraction.kind, mdp.r_max(), mdp.gamma)?;
    Some(error_bound(
        mdp.action_count,
        config.search.simulations,
        zeta,
        abstraction.kind.is_transitive(),
    ))
}

fn run_episodes<M: Model>(
    model: &M,
    start: impl Fn() -> M::State,
    config: &RunConfig,
    bound: Option<f64>,
) -> Result<RunOutput, HarnessError> {
    let abstraction = config
        .search
        .abstraction
        .as_ref()
        .map_or_else(|| "none".to_string(), |a| a.kind.name().to_string());
    let mut records = Vec::new();
    let mut episode_returns = Vec::with_capacity(config.episodes);
    let mut events = Vec::new();
    for episode in 0..config.episodes {
        let episode_seed = mix_seed(config.search.seed, episode as u64);
        let result = run_episode(model, start(), &config.search, episode_seed, config.move_cap())?;
        for m in result.moves {
            records.push(SearchRecord {
                schema_version: METRICS_SCHEMA_VERSION,
                episode,
                move_index: m.move_index,
                simulations: config.search.simulations,
                seed: episode_seed,
                abstraction: abstraction.clone(),
                action: m.action,
                reward: m.reward,
                searched_paths: m.metrics.searched_paths,
                aggregated_paths: m.metrics.aggregated_paths,
                aggregation_percentage: m.metrics.aggregation_percentage,
                expanded_nodes: m.metrics.expanded_nodes,
                average_search_depth: m.metrics.average_search_depth,
                comparisons_max: m.metrics.comparisons_per_iteration.iter().copied().max().unwrap_or(0),
                comparisons_total: m.metrics.comparisons_per_iteration.iter().sum(),
                aggregation_error_measured: m.metrics.aggregation_error_measured,
                aggregation_error_bound: bound,
            });
            events.extend(m.events);
        }
        episode_returns.push(result.episode_return);
    }
    Ok(RunOutput { records, episode_returns, events })
}
