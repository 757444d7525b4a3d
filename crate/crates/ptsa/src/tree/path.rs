use std::collections::HashMap;

use super::node::NodeId;

/// A root-anchored node sequence: the first entry is a child of the search
/// root, the last is the path's leaf. The unit of aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPath {
    pub nodes: Vec<NodeId>,
}

impl SearchPath {
    pub fn new(nodes: Vec<NodeId>) -> Self {
        debug_assert!(!nodes.is_empty());
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// Rewrites node ids through a merge map, following chains.
    pub fn remap(&mut self, merged_into: &HashMap<NodeId, NodeId>) {
        for id in &mut self.nodes {
            let mut cur = *id;
            while let Some(&next) = merged_into.get(&cur) {
                cur = next;
            }
            *id = cur;
        }
    }
}

/// The searched-path list maintained across simulations: the live paths the
/// aggregation sweep compares new branches against.
#[derive(Debug, Clone, Default)]
pub struct SearchedPathList {
    paths: Vec<SearchPath>,
}

impl SearchedPathList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SearchPath> {
        self.paths.iter()
    }

    pub fn get(&self, idx: usize) -> &SearchPath {
        &self.paths[idx]
    }

    /// Adds a path unless an identical node sequence is already present.
    /// Returns whether the path was inserted.
    pub fn add(&mut self, path: SearchPath) -> bool {
        if self.paths.iter().any(|p| p.nodes == path.nodes) {
            return false;
        }
        self.paths.push(path);
        true
    }

    /// Removes the path with exactly these nodes.
    pub fn delete(&mut self, nodes: &[NodeId]) -> bool {
        if let Some(pos) = self.paths.iter().position(|p| p.nodes == nodes) {
            self.paths.remove(pos);
            true
        } else {
            false
        }
    }

    /// Rewrites every path through a merge map and drops duplicates that the
    /// rewrite created (identical node sequences are the same path).
    pub fn remap(&mut self, merged_into: &HashMap<NodeId, NodeId>) {
        for path in &mut self.paths {
            path.remap(merged_into);
        }
        let mut seen: Vec<Vec<NodeId>> = Vec::new();
        self.paths.retain(|p| {
            if seen.contains(&p.nodes) {
                false
            } else {
                seen.push(p.nodes.clone());
                true
            }
        });
    }

    /// Mean path length over the live paths.
    pub fn mean_length(&self) -> f64 {
        if self.paths.is_empty() {
            return 0.0;
        }
        self.paths.iter().map(|p| p.len() as f64).sum::<f64>() / self.paths.len() as f64
    }
}
