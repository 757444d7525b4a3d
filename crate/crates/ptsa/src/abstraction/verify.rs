use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::predicates::{eval_predicate, AbstractionFn};
use super::AbstractionError;
use crate::mdp::ValueTables;

/// Result of a transitivity sweep over state triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TransitivityOutcome {
    Pass { triples_checked: usize, exhaustive: bool },
    Counterexample { s1: usize, s2: usize, s3: usize },
}

impl TransitivityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, TransitivityOutcome::Pass { .. })
    }
}

/// Checks `p(s1,s2) and p(s2,s3) implies p(s1,s3)` over state triples.
/// Sweeps exhaustively when `|S|^3 <= 10^6`, otherwise samples
/// `triple_count` seeded triples. Returns the first violating triple found.
pub fn check_transitivity(
    abstraction: &AbstractionFn,
    tables: &ValueTables,
    triple_count: usize,
    seed: u64,
) -> Result<TransitivityOutcome, AbstractionError> {
    assert!(triple_count >= 1);
    let n = tables.q_star.len();
    let exhaustive = n.saturating_mul(n).saturating_mul(n) <= 1_000_000;
    let mut checked = 0usize;
    let mut test = |s1: usize, s2: usize, s3: usize| -> Result<Option<TransitivityOutcome>, AbstractionError> {
        checked += 1;
        if eval_predicate(s1, s2, abstraction, tables)?
            && eval_predicate(s2, s3, abstraction, tables)?
            && !eval_predicate(s1, s3, abstraction, tables)?
        {
            return Ok(Some(TransitivityOutcome::Counterexample { s1, s2, s3 }));
        }
        Ok(None)
    };
    if exhaustive {
        for s1 in 0..n {
            for s2 in 0..n {
                for s3 in 0..n {
                    if let Some(bad) = test(s1, s2, s3)? {
                        return Ok(bad);
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..triple_count {
            let (s1, s2, s3) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            if let Some(bad) = test(s1, s2, s3)? {
                return Ok(bad);
            }
        }
    }
    Ok(TransitivityOutcome::Pass { triples_checked: checked, exhaustive })
}

/// One synthetic tree where node- and path-level transitivity disagreed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceFailure {
    pub tree_index: usize,
    pub node_transitive: bool,
    pub path_transitive: bool,
    pub pool: Vec<usize>,
}

/// Outcome of the node/path transitivity equivalence check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub trees_checked: usize,
    pub failures: Vec<EquivalenceFailure>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies on small synthetic trees that the node predicate is transitive
/// over the tree's states exactly when the path predicate (the conjunction
/// over depths) is transitive over equal-length sibling paths.
///
/// Each tree draws its node states from a pool of at most four states, and
/// every pool state appears as a root child. Single-node sibling paths then
/// realize every node triple directly, so a node-level violation always
/// surfaces at the path level.
pub fn check_path_node_equivalence(
    abstraction: &AbstractionFn,
    tables: &ValueTables,
    tree_samples: usize,
    seed: u64,
) -> Result<EquivalenceReport, AbstractionError> {
    let n = tables.q_star.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for tree_index in 0..tree_samples {
        let pool_size = rng.gen_range(2..=4usize.min(n));
        let pool: Vec<usize> = (0..pool_size).map(|_| rng.gen_range(0..n)).collect();
        let paths = sample_tree_paths(&pool, &mut rng);

        let node_transitive = states_transitive(&pool, abstraction, tables)?;
        let path_transitive = paths_transitive(&paths, abstraction, tables)?;
        if node_transitive != path_transitive {
            failures.push(EquivalenceFailure { tree_index, node_transitive, path_transitive, pool });
        }
    }
    Ok(EquivalenceReport { trees_checked: tree_samples, failures })
}

/// Root-anchored paths of a random tree with depth <= 3 and branching <= 4,
/// node states drawn from `pool`. The root's children cover the pool
/// exactly once.
fn sample_tree_paths(pool: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut frontier: Vec<Vec<usize>> = pool.iter().map(|&s| vec![s]).collect();
    paths.extend(frontier.iter().cloned());
    for _depth in 2..=3 {
        let mut next_frontier = Vec::new();
        for prefix in &frontier {
            let children = rng.gen_range(0..=4usize);
            for _ in 0..children {
                let mut path = prefix.clone();
                path.push(pool[rng.gen_range(0..pool.len())]);
                paths.push(path.clone());
                next_frontier.push(path);
            }
        }
        frontier = next_frontier;
    }
    paths
}

fn states_transitive(
    pool: &[usize],
    abstraction: &AbstractionFn,
    tables: &ValueTables,
) -> Result<bool, AbstractionError> {
    for &s1 in pool {
        for &s2 in pool {
            for &s3 in pool {
                if eval_predicate(s1, s2, abstraction, tables)?
                    && eval_predicate(s2, s3, abstraction, tables)?
                    && !eval_predicate(s1, s3, abstraction, tables)?
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn paths_transitive(
    paths: &[Vec<usize>],
    abstraction: &AbstractionFn,
    tables: &ValueTables,
) -> Result<bool, AbstractionError> {
    let path_pred = |a: &[usize], b: &[usize]| -> Result<bool, AbstractionError> {
        if a.len() != b.len() {
            return Ok(false);
        }
        for (&sa, &sb) in a.iter().zip(b) {
            if !eval_predicate(sa, sb, abstraction, tables)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    for b1 in paths {
        for b2 in paths {
            for b3 in paths {
                if path_pred(b1, b2)? && path_pred(b2, b3)? && !path_pred(b1, b3)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
