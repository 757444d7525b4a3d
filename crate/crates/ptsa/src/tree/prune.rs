use std::collections::HashMap;

use super::node::NodeId;
use super::{SearchTree, TreeError};

/// Outcome of a prune: how many visits moved onto the survivor, and which
/// nodes merged into which, for rewriting the searched-path list.
#[derive(Debug, Clone, Default)]
pub struct PruneReport {
    pub visit_delta: u64,
    pub merged_into: HashMap<NodeId, NodeId>,
}

impl<S: Clone> SearchTree<S> {
    /// Prunes `victim` in favor of `survivor`: two live sibling paths of
    /// equal length anchored at the root. Per depth, the victim node's visit
    /// count and value sum merge into the survivor node; nodes shared
    /// between the paths are untouched. Off-path descendants of a victim
    /// node are merged into the survivor's subtree action by action (moved
    /// over when the survivor has no child for that action), so no live
    /// visit count is ever lost. The root itself is never pruned.
    pub fn prune(&mut self, victim: &[NodeId], survivor: &[NodeId]) -> Result<PruneReport, TreeError> {
        if victim.len() != survivor.len() || victim.is_empty() {
            return Err(TreeError::BadPrune(format!(
                "paths of unequal length ({} vs {})",
                victim.len(),
                survivor.len()
            )));
        }
        if victim == survivor {
            return Err(TreeError::BadPrune("victim and survivor are the same path".into()));
        }
        for &id in victim.iter().chain(survivor) {
            if self.nodes[id].pruned {
                return Err(TreeError::BadPrune(format!("node {id} is already pruned")));
            }
        }
        let root = self.root;
        if self.nodes[victim[0]].parent != Some(root) || self.nodes[survivor[0]].parent != Some(root) {
            return Err(TreeError::BadPrune("paths are not anchored at the root".into()));
        }

        let mut report = PruneReport::default();
        for depth in 0..victim.len() {
            let v = victim[depth];
            let s = survivor[depth];
            if v == s {
                continue;
            }
            // The on-path child is handled positionally at the next depth.
            let on_path_child = victim.get(depth + 1).copied();
            self.detach_from_parent(v);
            let off_path: Vec<(usize, NodeId)> = self.nodes[v]
                .children
                .iter()
                .copied()
                .filter(|&(_, c)| Some(c) != on_path_child)
                .collect();
            for (action, child) in off_path {
                self.adopt_or_merge(s, action, child, &mut report);
            }
            report.visit_delta += self.nodes[v].visit_count;
            self.fold_stats(v, s);
            report.merged_into.insert(v, s);
        }
        debug_assert!(self.is_well_formed(), "tree malformed after prune");
        Ok(report)
    }

    /// Moves `child` under `new_parent` at `action`, or merges it into the
    /// existing child there.
    fn adopt_or_merge(&mut self, new_parent: NodeId, action: usize, child: NodeId, report: &mut PruneReport) {
        let existing = self.nodes[new_parent].children.iter().find(|&&(a, _)| a == action).map(|&(_, c)| c);
        match existing {
            Some(target) => self.merge_subtree(child, target, report),
            None => {
                self.nodes[child].parent = Some(new_parent);
                let children = &mut self.nodes[new_parent].children;
                let pos = children.partition_point(|&(a, _)| a < action);
                children.insert(pos, (action, child));
            }
        }
    }

    /// Recursively merges the subtree rooted at `src` into `dst`, matching
    /// children by action.
    fn merge_subtree(&mut self, src: NodeId, dst: NodeId, report: &mut PruneReport) {
        debug_assert_ne!(src, dst);
        let src_children = std::mem::take(&mut self.nodes[src].children);
        for (action, child) in src_children {
            self.adopt_or_merge(dst, action, child, report);
        }
        self.fold_stats(src, dst);
        report.merged_into.insert(src, dst);
    }

    /// Accumulates `src`'s statistics into `dst` and marks `src` pruned.
    /// The survivor keeps its own prior and model state.
    fn fold_stats(&mut self, src: NodeId, dst: NodeId) {
        let (visits, value) = {
            let n = &self.nodes[src];
            (n.visit_count, n.value_sum)
        };
        self.nodes[dst].visit_count += visits;
        self.nodes[dst].value_sum += value;
        // A never-evaluated survivor that adopts an expanded victim's subtree
        // inherits its evaluation, so later descents treat it as a normal
        // interior node instead of re-expanding it.
        if self.nodes[src].expanded && !self.nodes[dst].expanded {
            self.nodes[dst].expanded = true;
            self.nodes[dst].reward = self.nodes[src].reward;
            if self.nodes[dst].state.is_none() {
                self.nodes[dst].state = self.nodes[src].state.take();
            }
        }
        let src_node = &mut self.nodes[src];
        src_node.visit_count = 0;
        src_node.value_sum = 0.0;
        src_node.children.clear();
        src_node.pruned = true;
    }

    fn detach_from_parent(&mut self, id: NodeId) {
        if let Some(parent) = self.nodes[id].parent {
            self.nodes[parent].children.retain(|&(_, c)| c != id);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Root with two disjoint length-2 chains under actions 0 and 1.
    fn two_chain_tree() -> (SearchTree<()>, Vec<NodeId>, Vec<NodeId>) {
        let mut tree = SearchTree::new((), 1.0, false);
        tree.expand(0, &[(0, 0.5), (1, 0.5)], (), 0.0).unwrap();
        let a = tree.children(0)[0].1;
        let b = tree.children(0)[1].1;
        tree.expand(a, &[(0, 1.0)], (), 0.0).unwrap();
        tree.expand(b, &[(0, 1.0)], (), 0.0).unwrap();
        let a2 = tree.children(a)[0].1;
        let b2 = tree.children(b)[0].1;
        (tree, vec![a, a2], vec![b, b2])
    }

    #[test]
    fn per_depth_counts_merge() {
        let (mut tree, victim, survivor) = two_chain_tree();
        tree.node_mut(victim[0]).visit_count = 1;
        tree.node_mut(victim[1]).visit_count = 1;
        tree.node_mut(survivor[0]).visit_count = 3;
        tree.node_mut(survivor[1]).visit_count = 2;
        let before = tree.live_visit_total();
        let report = tree.prune(&victim, &survivor).unwrap();
        assert_eq!(tree.node(survivor[0]).visit_count, 4);
        assert_eq!(tree.node(survivor[1]).visit_count, 3);
        assert!(tree.node(victim[0]).pruned);
        assert!(tree.node(victim[1]).pruned);
        assert_eq!(report.visit_delta, 2);
        // Visit conservation over the unpruned subtree.
        assert_eq!(tree.live_visit_total(), before);
    }

    #[test]
    fn shared_prefix_is_preserved() {
        let mut tree = SearchTree::new((), 1.0, false);
        tree.expand(0, &[(0, 1.0)], (), 0.0).unwrap();
        let shared = tree.children(0)[0].1;
        tree.expand(shared, &[(0, 0.5), (1, 0.5)], (), 0.0).unwrap();
        let x = tree.children(shared)[0].1;
        let y = tree.children(shared)[1].1;
        tree.prune(&[shared, x], &[shared, y]).unwrap();
        assert!(!tree.node(shared).pruned);
        assert!(tree.node(x).pruned);
        assert!(!tree.node(y).pruned);
    }

    #[test]
    fn unequal_lengths_rejected() {
        let (mut tree, victim, survivor) = two_chain_tree();
        assert!(tree.prune(&victim[..1], &survivor).is_err());
    }

    #[test]
    fn off_path_children_move_to_survivor() {
        let (mut tree, victim, survivor) = two_chain_tree();
        // Give the victim's first node an extra child under action 7.
        let extra = tree.nodes.len();
        tree.nodes.push(crate::tree::SearchNode::child(extra, victim[0], 7, 0.1));
        tree.node_mut(extra).visit_count = 5;
        tree.node_mut(victim[0]).children.push((7, extra));
        let before = tree.live_visit_total();
        tree.prune(&victim, &survivor).unwrap();
        // The extra child now hangs off the survivor.
        assert_eq!(tree.node(extra).parent, Some(survivor[0]));
        assert!(!tree.node(extra).pruned);
        assert_eq!(tree.live_visit_total(), before);
        assert!(tree.is_well_formed());
    }

    #[test]
    fn off_path_conflicts_merge_by_action() {
        let (mut tree, victim, survivor) = two_chain_tree();
        // Both divergent nodes carry a child under action 7.
        let extra_v = tree.nodes.len();
        tree.nodes.push(crate::tree::SearchNode::child(extra_v, victim[0], 7, 0.1));
        tree.node_mut(extra_v).visit_count = 5;
        tree.node_mut(extra_v).value_sum = 2.0;
        tree.node_mut(victim[0]).children.push((7, extra_v));
        let extra_s = tree.nodes.len();
        tree.nodes.push(crate::tree::SearchNode::child(extra_s, survivor[0], 7, 0.2));
        tree.node_mut(extra_s).visit_count = 1;
        tree.node_mut(extra_s).value_sum = 0.5;
        tree.node_mut(survivor[0]).children.push((7, extra_s));
        let before = tree.live_visit_total();
        let report = tree.prune(&victim, &survivor).unwrap();
        assert_eq!(tree.node(extra_s).visit_count, 6);
        assert_abs_diff_eq!(tree.node(extra_s).value_sum, 2.5, epsilon = 1e-12);
        assert!(tree.node(extra_v).pruned);
        assert_eq!(report.merged_into[&extra_v], extra_s);
        assert_eq!(tree.live_visit_total(), before);
    }

    #[test]
    fn same_path_rejected() {
        let (mut tree, victim, _) = two_chain_tree();
        assert!(tree.prune(&victim.clone(), &victim).is_err());
    }
}
