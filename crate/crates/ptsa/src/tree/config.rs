use serde::{Deserialize, Serialize};

use crate::abstraction::AbstractionFn;

/// Where predicate Q rows come from during a live search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QSource {
    /// Mean Q over a node's expanded children, from tree statistics.
    #[default]
    TreeEstimate,
    /// The model's Q-row estimate for the node's state (exact for the
    /// tabular oracle, perturbed under a noise wrapper).
    Model,
}

/// Parameters of one search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Number of simulations `N_s`.
    pub simulations: usize,
    /// Exploration constant `c(s)` (constant schedule).
    pub c_puct: f64,
    /// When set, expansion subsamples this many legal actions,
    /// prior-proportionally without replacement.
    #[serde(default)]
    pub sampled_actions: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub abstraction: Option<AbstractionFn>,
    #[serde(default)]
    pub q_source: QSource,
}

impl SearchConfig {
    pub fn baseline(simulations: usize, seed: u64) -> Self {
        Self {
            simulations,
            c_puct: 1.25,
            sampled_actions: None,
            seed,
            abstraction: None,
            q_source: QSource::TreeEstimate,
        }
    }

    pub fn with_abstraction(mut self, abstraction: AbstractionFn) -> Self {
        self.abstraction = Some(abstraction);
        self
    }
}
