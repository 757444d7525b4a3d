//! Abstraction predicates, the path-level aggregation probability, and the
//! verification machinery for transitivity and error bounds.
//!
//! Two families live here. The deterministic predicates (`phi_a_star`,
//! `phi_q_star` and their approximate variants, plus the bucketing
//! `phi_q_d`) compare two states through their Q-value rows and decide
//! aggregation as a hard boolean. The probabilistic abstraction
//! `phi_q_psi_alpha` instead scores a node pair by the Jensen-Shannon
//! divergence between softmax value distributions, and lifts node scores to
//! a path-level aggregation probability.

mod cluster;
mod error;
mod math;
mod predicates;
mod prob;
mod verify;

pub use cluster::{brute_force_min_partition, greedy_clusters, smallest_abstract_space, Clustering};
pub use error::{aggregation_error, error_bound, loss_bound};
pub use math::{js_divergence, softmax_q, ValueDistribution};
pub use predicates::{eval_predicate, eval_predicate_rows, AbstractionFn, AbstractionKind, DecisionMode};
pub use prob::{decide_aggregate, node_agg_prob, path_agg_prob, prob_transitivity, AggregationEvent};
pub use verify::{check_path_node_equivalence, check_transitivity, EquivalenceReport, TransitivityOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("empty action set")]
    EmptySupport,
    #[error("mismatched supports: {0:?} vs {1:?}")]
    SupportMismatch(Vec<usize>, Vec<usize>),
    #[error("probabilities do not sum to 1 (sum {0})")]
    NotADistribution(f64),
    #[error("state {0} absent from value tables")]
    UnknownState(usize),
    #[error("paths have unequal lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("non-finite value encountered")]
    NonFinite,
}
