use serde::{Deserialize, Serialize};

use super::AbstractionError;
use crate::mdp::ValueTables;

/// Tolerance used by the exact-equality predicates.
pub const EXACT_TOL: f64 = 1e-9;

/// The six abstraction families. Each variant carries exactly the
/// parameters its predicate uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbstractionKind {
    /// Same optimal action and equal optimal value.
    PhiAStar,
    /// Same optimal action, optimal values within `epsilon`.
    PhiAStarEps { epsilon: f64 },
    /// Identical Q rows.
    PhiQStar,
    /// Q rows within `epsilon` in sup-norm.
    PhiQStarEps { epsilon: f64 },
    /// Q values fall into the same ceiling buckets of width `d`.
    PhiQD { d: f64 },
    /// Probability abstraction: aggregation probability
    /// `alpha * (1 - D_JS)` between softmax value distributions.
    PhiQPsiAlpha { alpha: f64 },
}

impl AbstractionKind {
    /// Whether the predicate is deterministic (a Table-style hard test)
    /// rather than probabilistic.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, AbstractionKind::PhiQPsiAlpha { .. })
    }

    /// Whether the predicate chains: pairwise aggregability of
    /// `(s1, s2)` and `(s2, s3)` implies aggregability of `(s1, s3)`.
    /// The approximate threshold predicates do not chain.
    pub fn is_transitive(&self) -> bool {
        matches!(
            self,
            AbstractionKind::PhiAStar | AbstractionKind::PhiQStar | AbstractionKind::PhiQD { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            AbstractionKind::PhiAStar => "phi_a_star",
            AbstractionKind::PhiAStarEps { .. } => "phi_a_star_eps",
            AbstractionKind::PhiQStar => "phi_q_star",
            AbstractionKind::PhiQStarEps { .. } => "phi_q_star_eps",
            AbstractionKind::PhiQD { .. } => "phi_q_d",
            AbstractionKind::PhiQPsiAlpha { .. } => "phi_q_psi_alpha",
        }
    }
}

/// How a path-level aggregation probability turns into a boolean decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DecisionMode {
    /// Aggregate when the probability reaches `tau`.
    Threshold { tau: f64 },
    /// Draw once from a seeded generator.
    Bernoulli { seed: u64 },
}

impl Default for DecisionMode {
    fn default() -> Self {
        DecisionMode::Threshold { tau: 0.5 }
    }
}

/// An abstraction predicate plus its decision mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbstractionFn {
    #[serde(flatten)]
    pub kind: AbstractionKind,
    #[serde(default)]
    pub decision: DecisionMode,
}

impl AbstractionFn {
    pub fn new(kind: AbstractionKind) -> Self {
        Self { kind, decision: DecisionMode::default() }
    }

    pub fn with_decision(kind: AbstractionKind, decision: DecisionMode) -> Self {
        Self { kind, decision }
    }
}

/// Evaluates a deterministic predicate on two states through exact value
/// tables. `phi_q_psi_alpha` is probabilistic and has no truth value here;
/// it reports `false` only through [`super::node_agg_prob`].
pub fn eval_predicate(
    sa: usize,
    sb: usize,
    abstraction: &AbstractionFn,
    tables: &ValueTables,
) -> Result<bool, AbstractionError> {
    if sa >= tables.q_star.len() {
        return Err(AbstractionError::UnknownState(sa));
    }
    if sb >= tables.q_star.len() {
        return Err(AbstractionError::UnknownState(sb));
    }
    Ok(eval_predicate_rows(tables.q_row(sa), tables.q_row(sb), &abstraction.kind))
}

/// Predicate evaluation on raw Q rows. Search-time evaluation (model
/// estimates) and table-backed verification share this path.
pub fn eval_predicate_rows(row_a: &[f64], row_b: &[f64], kind: &AbstractionKind) -> bool {
    debug_assert_eq!(row_a.len(), row_b.len());
    match kind {
        AbstractionKind::PhiAStar => {
            argmax(row_a) == argmax(row_b) && (max_of(row_a) - max_of(row_b)).abs() <= EXACT_TOL
        }
        AbstractionKind::PhiAStarEps { epsilon } => {
            argmax(row_a) == argmax(row_b) && (max_of(row_a) - max_of(row_b)).abs() <= *epsilon
        }
        AbstractionKind::PhiQStar => sup_gap(row_a, row_b) <= EXACT_TOL,
        AbstractionKind::PhiQStarEps { epsilon } => sup_gap(row_a, row_b) <= *epsilon,
        AbstractionKind::PhiQD { d } => row_a
            .iter()
            .zip(row_b)
            .all(|(qa, qb)| (qa / d).ceil() as i64 == (qb / d).ceil() as i64),
        AbstractionKind::PhiQPsiAlpha { .. } => false,
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &q) in row.iter().enumerate() {
        if q > row[best] {
            best = i;
        }
    }
    best
}

fn max_of(row: &[f64]) -> f64 {
    row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn sup_gap(row_a: &[f64], row_b: &[f64]) -> f64 {
    row_a.iter().zip(row_b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
