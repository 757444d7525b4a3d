use rand::Rng;
use serde::{Deserialize, Serialize};

use super::math::{js_divergence, softmax_q};
use super::predicates::DecisionMode;
use super::AbstractionError;

/// One path-pair comparison: the aggregation probability, how it decomposed
/// over depths, and the decision taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationEvent {
    pub sim_index: usize,
    pub path_a: usize,
    pub path_b: usize,
    pub prob: f64,
    pub per_node_probs: Vec<f64>,
    pub decided: bool,
}

/// Node-level aggregation probability `alpha * (1 - D_JS)` between the
/// softmax distributions of two Q rows over their action supports.
///
/// Differing legal-action sets yield probability 0: mismatched supports
/// signal genuinely different states.
pub fn node_agg_prob(
    support_a: &[usize],
    q_a: &[f64],
    support_b: &[usize],
    q_b: &[f64],
    alpha: f64,
) -> Result<f64, AbstractionError> {
    if support_a != support_b {
        return Ok(0.0);
    }
    if support_a.is_empty() {
        return Ok(0.0);
    }
    let pa = softmax_q(support_a, q_a)?;
    let pb = softmax_q(support_b, q_b)?;
    let djs = js_divergence(&pa, &pb)?;
    Ok((alpha * (1.0 - djs)).clamp(0.0, alpha.max(0.0)))
}

/// Path-level aggregation probability `1 - prod_i (1 - p_i)` over the
/// per-depth node probabilities.
pub fn path_agg_prob(
    sim_index: usize,
    path_a: usize,
    path_b: usize,
    per_node_probs: Vec<f64>,
) -> AggregationEvent {
    let prob = 1.0 - per_node_probs.iter().fold(1.0, |acc, p| acc * (1.0 - p));
    AggregationEvent {
        sim_index,
        path_a,
        path_b,
        prob: prob.clamp(0.0, 1.0),
        per_node_probs,
        decided: false,
    }
}

/// Turns an aggregation probability into a boolean. Threshold mode compares
/// against `tau`; Bernoulli mode draws once from the caller's generator.
pub fn decide_aggregate<R: Rng>(event: &mut AggregationEvent, mode: &DecisionMode, rng: &mut R) -> bool {
    let decided = match mode {
        DecisionMode::Threshold { tau } => event.prob >= *tau,
        DecisionMode::Bernoulli { .. } => {
            if event.prob >= 1.0 {
                true
            } else if event.prob <= 0.0 {
                false
            } else {
                rng.gen_bool(event.prob)
            }
        }
    };
    event.decided = decided;
    decided
}

/// Probability that transitivity holds among three paths with pairwise
/// aggregation probabilities `p12`, `p23`, `p13`: the chain either closes
/// (`p12 p23 p13`) or never forms (`(1 - p13)(1 - p12 p23)`).
pub fn prob_transitivity(p12: f64, p23: f64, p13: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p12));
    debug_assert!((0.0..=1.0).contains(&p23));
    debug_assert!((0.0..=1.0).contains(&p13));
    p12 * p23 * p13 + (1.0 - p13) * (1.0 - p12 * p23)
}
