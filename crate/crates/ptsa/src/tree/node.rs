pub type NodeId = usize;

/// One node of the search tree, holding the PUCT statistics for the edge
/// that leads into it.
#[derive(Debug, Clone)]
pub struct SearchNode<S> {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub action_from_parent: usize,
    /// Policy prior of the edge into this node.
    pub prior: f64,
    pub visit_count: u64,
    pub value_sum: f64,
    /// Reward predicted on entry.
    pub reward: f64,
    /// Model state handle, set at expansion.
    pub state: Option<S>,
    /// Live children, sorted by action index.
    pub children: Vec<(usize, NodeId)>,
    pub expanded: bool,
    pub pruned: bool,
}

impl<S> SearchNode<S> {
    pub fn root(state: S) -> Self {
        Self {
            id: 0,
            parent: None,
            action_from_parent: 0,
            prior: 1.0,
            visit_count: 0,
            value_sum: 0.0,
            reward: 0.0,
            state: Some(state),
            children: Vec::new(),
            expanded: false,
            pruned: false,
        }
    }

    pub fn child(id: NodeId, parent: NodeId, action: usize, prior: f64) -> Self {
        Self {
            id,
            parent: Some(parent),
            action_from_parent: action,
            prior,
            visit_count: 0,
            value_sum: 0.0,
            reward: 0.0,
            state: None,
            children: Vec::new(),
            expanded: false,
            pruned: false,
        }
    }

    /// Mean backed-up value; unvisited nodes report 0.
    pub fn mean_value(&self) -> f64 {
        if self.visit_count == 0 {
            0.0
        } else {
            self.value_sum / self.visit_count as f64
        }
    }
}
