//! The MCTS core: node statistics, PUCT selection, expansion,
//! backpropagation, and the pruning/visit-merge mechanics that the
//! abstraction sweep invokes.
//!
//! A single tree is mutated by exactly one worker. Node ids are indices
//! into a flat arena; pruned nodes stay in the arena (so serialized output
//! is stable) but are detached from all children lists.

mod config;
mod node;
mod path;
mod prune;

pub use config::{QSource, SearchConfig};
pub use node::{NodeId, SearchNode};
pub use path::{SearchPath, SearchedPathList};
pub use prune::PruneReport;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TREE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("selection on node {0} which is a leaf or fully pruned")]
    NotSelectable(NodeId),
    #[error("node {0} is already expanded")]
    DoubleExpansion(NodeId),
    #[error("prune rejected: {0}")]
    BadPrune(String),
    #[error("empty legal action set at node {0}")]
    NoLegalActions(NodeId),
}

/// Search tree over model states of type `S`.
#[derive(Debug, Clone)]
pub struct SearchTree<S> {
    pub nodes: Vec<SearchNode<S>>,
    pub root: NodeId,
    pub gamma: f64,
    pub two_player: bool,
    /// Bound asserted on every backed-up return, when known.
    pub value_bound: Option<f64>,
    expanded_count: usize,
}

impl<S: Clone> SearchTree<S> {
    pub fn new(root_state: S, gamma: f64, two_player: bool) -> Self {
        let root = SearchNode::root(root_state);
        Self { nodes: vec![root], root: 0, gamma, two_player, value_bound: None, expanded_count: 0 }
    }

    pub fn node(&self, id: NodeId) -> &SearchNode<S> {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut SearchNode<S> {
        &mut self.nodes[id]
    }

    /// Number of expansion operations performed.
    pub fn expanded_nodes(&self) -> usize {
        self.expanded_count
    }

    /// Live (unpruned) expanded nodes: the surviving search space.
    pub fn live_expanded_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| n.expanded && !n.pruned).count()
    }

    /// Live (unpruned) children of `id`, sorted by action index.
    pub fn children(&self, id: NodeId) -> &[(usize, NodeId)] {
        &self.nodes[id].children
    }

    /// PUCT selection over the unpruned children of `id`:
    /// `argmax_a Q(s,a) + c * P(s,a) * sqrt(sum_b N(s,b)) / (1 + N(s,a))`.
    /// Ties break to the lowest action index.
    pub fn puct_select(&self, id: NodeId, c_puct: f64) -> Result<(usize, NodeId), TreeError> {
        let node = &self.nodes[id];
        if !node.expanded || node.pruned || node.children.is_empty() {
            return Err(TreeError::NotSelectable(id));
        }
        let total_visits: u64 = node.children.iter().map(|&(_, c)| self.nodes[c].visit_count).sum();
        let sqrt_total = (total_visits as f64).sqrt();
        let mut best: Option<(usize, NodeId, f64)> = None;
        for &(action, child_id) in &node.children {
            let child = &self.nodes[child_id];
            let score =
                child.mean_value() + c_puct * child.prior * sqrt_total / (1.0 + child.visit_count as f64);
            match best {
                Some((_, _, best_score)) if score <= best_score => {}
                _ => best = Some((action, child_id, score)),
            }
        }
        let (action, child, _) = best.unwrap();
        Ok((action, child))
    }

    /// Expands a leaf with one child per `(action, prior)` entry, storing the
    /// model state and entry reward on the node. Entries must be sorted by
    /// action and non-empty.
    pub fn expand(
        &mut self,
        id: NodeId,
        entries: &[(usize, f64)],
        state: S,
        reward: f64,
    ) -> Result<(), TreeError> {
        if self.nodes[id].expanded {
            return Err(TreeError::DoubleExpansion(id));
        }
        if entries.is_empty() {
            return Err(TreeError::NoLegalActions(id));
        }
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0), "entries must be sorted by action");
        debug_assert!(entries.iter().map(|e| e.1).sum::<f64>() <= 1.0 + 1e-6, "priors exceed 1");
        let mut children = Vec::with_capacity(entries.len());
        for &(action, prior) in entries {
            let child_id = self.nodes.len();
            self.nodes.push(SearchNode::child(child_id, id, action, prior));
            children.push((action, child_id));
        }
        let node = &mut self.nodes[id];
        node.children = children;
        node.state = Some(state);
        node.reward = reward;
        node.expanded = true;
        self.expanded_count += 1;
        Ok(())
    }

    /// Backs up `leaf_value` along `path` (root-child first, leaf last),
    /// folding stored rewards into the discounted return and negating per
    /// ply for two-player trees.
    pub fn backpropagate(&mut self, path: &[NodeId], leaf_value: f64) {
        let mut ret = leaf_value;
        for (i, &id) in path.iter().rev().enumerate() {
            if i > 0 && self.two_player {
                ret = -ret;
            }
            let node = &mut self.nodes[id];
            ret = node.reward + self.gamma * ret;
            node.visit_count += 1;
            node.value_sum += ret;
            if let Some(bound) = self.value_bound {
                debug_assert!(
                    ret.abs() <= bound + 1e-9,
                    "backed-up return {ret} exceeds value bound {bound}"
                );
            }
        }
    }

    /// Visit-count-proportional policy over the root's unpruned children,
    /// falling back to normalized priors when no child has been visited.
    pub fn collect_policy(&self) -> Vec<(usize, f64)> {
        let root = &self.nodes[self.root];
        debug_assert!(root.expanded, "policy requested from an unexpanded root");
        let total_visits: u64 = root.children.iter().map(|&(_, c)| self.nodes[c].visit_count).sum();
        if total_visits == 0 {
            let total_prior: f64 = root.children.iter().map(|&(_, c)| self.nodes[c].prior).sum();
            return root
                .children
                .iter()
                .map(|&(a, c)| (a, self.nodes[c].prior / total_prior))
                .collect();
        }
        root.children
            .iter()
            .map(|&(a, c)| (a, self.nodes[c].visit_count as f64 / total_visits as f64))
            .collect()
    }

    /// Sum of visit counts over the root's live children.
    pub fn root_child_visits(&self) -> u64 {
        self.nodes[self.root].children.iter().map(|&(_, c)| self.nodes[c].visit_count).sum()
    }

    /// Sum of visit counts over every live node.
    pub fn live_visit_total(&self) -> u64 {
        self.nodes.iter().filter(|n| !n.pruned).map(|n| n.visit_count).sum()
    }

    /// Q row of a node derived from its children's tree statistics, together
    /// with the child action support. Unvisited children contribute Q = 0.
    pub fn child_q_row(&self, id: NodeId) -> (Vec<usize>, Vec<f64>) {
        let node = &self.nodes[id];
        let mut support = Vec::with_capacity(node.children.len());
        let mut row = Vec::with_capacity(node.children.len());
        for &(action, child) in &node.children {
            support.push(action);
            row.push(self.nodes[child].mean_value());
        }
        (support, row)
    }

    /// No live node references a pruned parent and children lists hold only
    /// live nodes. Used by tests and debug assertions.
    pub fn is_well_formed(&self) -> bool {
        for node in &self.nodes {
            if node.pruned && !node.children.is_empty() {
                return false;
            }
            if !node.pruned {
                if let Some(parent) = node.parent {
                    if self.nodes[parent].pruned {
                        return false;
                    }
                }
                for &(_, c) in &node.children {
                    if self.nodes[c].pruned || self.nodes[c].parent != Some(node.id) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Diagnostic serialization: a stable, versioned node list.
    pub fn to_diagnostic_json(&self) -> String {
        let dump = TreeDump {
            schema_version: TREE_SCHEMA_VERSION,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDump {
                    id: n.id,
                    parent: n.parent,
                    action: n.action_from_parent,
                    prior: n.prior,
                    visit_count: n.visit_count,
                    value_sum: n.value_sum,
                    reward: n.reward,
                    expanded: n.expanded,
                    pruned: n.pruned,
                })
                .collect(),
        };
        serde_json::to_string(&dump).expect("tree dump serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TreeDump {
    pub schema_version: u32,
    pub nodes: Vec<NodeDump>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NodeDump {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub action: usize,
    pub prior: f64,
    pub visit_count: u64,
    pub value_sum: f64,
    pub reward: f64,
    pub expanded: bool,
    pub pruned: bool,
}

/// Prior-proportional subsampling without replacement, used when a search
/// limits expansion to a sampled action subset. The result is sorted by
/// action index; priors keep their original values (a sub-distribution).
pub fn subsample_actions<R: Rng>(
    entries: &[(usize, f64)],
    count: usize,
    rng: &mut R,
) -> Vec<(usize, f64)> {
    if count >= entries.len() {
        return entries.to_vec();
    }
    let mut remaining: Vec<(usize, f64)> = entries.to_vec();
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = remaining.iter().map(|e| e.1.max(1e-12)).sum();
        let mut draw = rng.gen_range(0.0..total);
        let mut chosen = remaining.len() - 1;
        for (i, e) in remaining.iter().enumerate() {
            draw -= e.1.max(1e-12);
            if draw <= 0.0 {
                chosen = i;
                break;
            }
        }
        picked.push(remaining.swap_remove(chosen));
    }
    picked.sort_by_key(|e| e.0);
    picked
}
