use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::tree::SearchConfig;

/// Which environment a run is played on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    RandomMdp {
        seed: u64,
        state_count: usize,
        action_count: usize,
        #[serde(default = "default_sparsity")]
        sparsity: f64,
    },
    /// Random MDP whose root actions come in mirrored pairs with identical
    /// optimal Q rows; the canonical search-space-reduction benchmark.
    SymmetricMdp { seed: u64, core_states: usize, action_count: usize },
    Gomoku { size: usize, win_length: usize },
    Cartpole { actions: usize },
}

fn default_sparsity() -> f64 {
    1.0
}

impl EnvironmentSpec {
    pub fn is_tabular(&self) -> bool {
        matches!(self, EnvironmentSpec::RandomMdp { .. } | EnvironmentSpec::SymmetricMdp { .. })
    }
}

/// Which model stands in for the learned networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    Oracle,
    /// Oracle wrapped with deterministic Gaussian prediction noise
    /// (tabular environments only).
    Noisy { value_sigma: f64, prior_sigma: f64, seed: u64 },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Oracle
    }
}

/// One experiment: environment, search parameters, model, and output plumbing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub environment: EnvironmentSpec,
    pub search: SearchConfig,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    /// Cap on moves per episode; `None` uses a per-environment default.
    #[serde(default)]
    pub max_moves: Option<usize>,
    /// Base path for `<out>.jsonl` / `<out>.csv` / `<out>.report.json`.
    #[serde(default)]
    pub output_path: Option<String>,
}

fn default_episodes() -> usize {
    1
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.episodes == 0 {
            return Err(HarnessError::Config("episodes must be positive".into()));
        }
        if self.search.simulations == 0 {
            return Err(HarnessError::Config("simulations must be positive".into()));
        }
        if matches!(self.model, ModelSpec::Noisy { .. }) && !self.environment.is_tabular() {
            return Err(HarnessError::Config(
                "the noise wrapper requires a tabular environment".into(),
            ));
        }
        match &self.environment {
            EnvironmentSpec::RandomMdp { state_count, action_count, sparsity, .. } => {
                if *state_count < 2 || *action_count < 2 {
                    return Err(HarnessError::Config("random_mdp needs |S| >= 2 and |A| >= 2".into()));
                }
                if !(*sparsity > 0.0 && *sparsity <= 1.0) {
                    return Err(HarnessError::Config("sparsity must lie in (0, 1]".into()));
                }
            }
            EnvironmentSpec::SymmetricMdp { core_states, action_count, .. } => {
                if *core_states < 2 || *action_count < 2 || action_count % 2 != 0 {
                    return Err(HarnessError::Config(
                        "symmetric_mdp needs core_states >= 2 and an even action_count >= 2".into(),
                    ));
                }
            }
            EnvironmentSpec::Gomoku { size, win_length } => {
                if *win_length < 2 || win_length > size {
                    return Err(HarnessError::Config("gomoku needs 2 <= win_length <= size".into()));
                }
            }
            EnvironmentSpec::Cartpole { actions } => {
                if *actions < 2 {
                    return Err(HarnessError::Config("cartpole needs at least 2 actions".into()));
                }
            }
        }
        Ok(())
    }

    /// Moves allowed per episode, falling back to a per-environment default.
    pub fn move_cap(&self) -> usize {
        self.max_moves.unwrap_or(match self.environment {
            EnvironmentSpec::RandomMdp { .. } | EnvironmentSpec::SymmetricMdp { .. } => 10,
            EnvironmentSpec::Gomoku { size, .. } => size * size,
            EnvironmentSpec::Cartpole { .. } => 30,
        })
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}
