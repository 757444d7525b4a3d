use serde::{Deserialize, Serialize};

use super::predicates::{eval_predicate, AbstractionFn};
use super::AbstractionError;
use crate::mdp::ValueTables;

/// Result of clustering a path set: member indices per cluster, plus the
/// number of pairwise predicate evaluations spent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
    pub comparisons: usize,
}

/// Greedy single-pass clustering: each new item is compared against one
/// representative per existing cluster and joins the first match. For a
/// transitive predicate this yields the exact minimum partition.
pub fn greedy_clusters<T, F>(items: &[T], mut aggregable: F) -> Clustering
where
    F: FnMut(&T, &T) -> bool,
{
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut comparisons = 0;
    for (idx, item) in items.iter().enumerate() {
        let mut placed = false;
        for cluster in &mut clusters {
            comparisons += 1;
            if aggregable(&items[cluster[0]], item) {
                cluster.push(idx);
                placed = true;
                break;
            }
        }
        if !placed {
            clusters.push(vec![idx]);
        }
    }
    Clustering { clusters, comparisons }
}

/// Clusters state-sequence paths under a deterministic predicate backed by
/// exact value tables. Two paths aggregate when they have equal length and
/// the predicate holds at every depth.
pub fn smallest_abstract_space(
    paths: &[Vec<usize>],
    abstraction: &AbstractionFn,
    tables: &ValueTables,
) -> Result<Clustering, AbstractionError> {
    for path in paths {
        for &s in path {
            if s >= tables.q_star.len() {
                return Err(AbstractionError::UnknownState(s));
            }
        }
    }
    Ok(greedy_clusters(paths, |a, b| paths_aggregable(a, b, abstraction, tables)))
}

fn paths_aggregable(a: &[usize], b: &[usize], abstraction: &AbstractionFn, tables: &ValueTables) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&sa, &sb)| eval_predicate(sa, sb, abstraction, tables).unwrap_or(false))
}

/// Exhaustive minimum-partition oracle: the fewest clusters such that every
/// pair inside a cluster is aggregable. Exponential; intended for path sets
/// of size <= 8.
pub fn brute_force_min_partition<T, F>(items: &[T], mut aggregable: F) -> usize
where
    F: FnMut(&T, &T) -> bool,
{
    let n = items.len();
    if n == 0 {
        return 0;
    }
    let compatible: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i == j || aggregable(&items[i], &items[j])).collect())
        .collect();
    let mut best = n;
    let mut assignment = vec![0usize; n];
    fn recurse(
        idx: usize,
        used: usize,
        assignment: &mut Vec<usize>,
        compatible: &[Vec<bool>],
        best: &mut usize,
    ) {
        if used >= *best {
            return;
        }
        if idx == assignment.len() {
            *best = used;
            return;
        }
        for c in 0..used {
            if (0..idx).filter(|&j| assignment[j] == c).all(|j| compatible[idx][j]) {
                assignment[idx] = c;
                recurse(idx + 1, used, assignment, compatible, best);
            }
        }
        assignment[idx] = used;
        recurse(idx + 1, used + 1, assignment, compatible, best);
    }
    recurse(0, 0, &mut assignment, &compatible, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::AbstractionKind;
    use crate::mdp::{random_mdp, value_iteration};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn universal_relation_gives_one_cluster() {
        let items = vec![1, 2, 3, 4];
        let c = greedy_clusters(&items, |_, _| true);
        assert_eq!(c.clusters.len(), 1);
    }

    #[test]
    fn discrete_relation_gives_singletons() {
        let items = vec![1, 2, 3, 4];
        let c = greedy_clusters(&items, |_, _| false);
        assert_eq!(c.clusters.len(), 4);
    }

    #[test]
    fn comparisons_bounded_by_item_times_cluster_count() {
        let items: Vec<usize> = (0..10).collect();
        let c = greedy_clusters(&items, |a, b| a % 3 == b % 3);
        assert_eq!(c.clusters.len(), 3);
        assert!(c.comparisons <= items.len() * c.clusters.len());
    }

    #[test]
    fn greedy_matches_brute_force_on_seeded_paths() {
        let mdp = random_mdp(23, 10, 3, 1.0);
        let tables = value_iteration(&mdp, 1e-10).unwrap();
        let abstraction = AbstractionFn::new(AbstractionKind::PhiQStar);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let paths: Vec<Vec<usize>> = (0..6)
                .map(|_| (0..2).map(|_| rng.gen_range(0..mdp.state_count)).collect())
                .collect();
            let greedy = smallest_abstract_space(&paths, &abstraction, &tables).unwrap();
            let exact = brute_force_min_partition(&paths, |a: &Vec<usize>, b: &Vec<usize>| {
                paths_aggregable(a, b, &abstraction, &tables)
            });
            assert_eq!(greedy.clusters.len(), exact);
        }
    }
}
