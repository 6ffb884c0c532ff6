//! Search tree storage and value backup.

use crate::env::{Action, GameState};

pub type NodeId = usize;

/// Per-action statistics stored on the parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStats {
    pub prior: f64,
    /// `N(a|s)`
    pub visits: u32,
    /// `Q(a|s)`, the mean of every value backed up through this edge.
    pub q: f64,
    pub q_max: f64,
    /// Sum of squared backed-up values.
    pub sum_sq: f64,
}

impl EdgeStats {
    pub fn new(prior: f64) -> Self {
        Self {
            prior,
            visits: 0,
            q: 0.0,
            q_max: 0.0,
            sum_sq: 0.0,
        }
    }

    pub fn update(&mut self, v: f64) {
        if self.visits == 0 {
            self.q = v;
            self.q_max = v;
        } else {
            let n = f64::from(self.visits);
            self.q = (n * self.q + v) / (n + 1.0);
            self.q_max = self.q_max.max(v);
        }
        self.sum_sq += v * v;
        self.visits += 1;
    }

    /// Standard deviation of the backed-up values, `√max(0, M2/N − Q²)`.
    pub fn sigma(&self) -> f64 {
        if self.visits == 0 {
            return 0.0;
        }
        (self.sum_sq / f64::from(self.visits) - self.q * self.q).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub action: Action,
    pub stats: EdgeStats,
    pub child: Option<NodeId>,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub state: GameState,
    /// `N(s)`: one for the node's own evaluation plus one per pass through it.
    pub visits: u32,
    /// Legal actions in ascending position order.
    pub edges: Vec<Edge>,
    pub terminal: bool,
    /// Cached terminal reward.
    pub reward: Option<f64>,
}

impl Node {
    pub fn new(state: GameState, priors: &[(Action, f64)]) -> Self {
        let terminal = state.is_terminal();
        Self {
            state,
            visits: 1,
            edges: priors
                .iter()
                .map(|&(action, prior)| Edge {
                    action,
                    stats: EdgeStats::new(prior),
                    child: None,
                })
                .collect(),
            terminal,
            reward: None,
        }
    }

    pub fn edge_visits(&self) -> u32 {
        self.edges.iter().map(|e| e.stats.visits).sum()
    }
}

#[derive(Debug, Default, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

/// Adds `v` to every edge on `path` and bumps each parent's `N(s)`.
/// The leaf itself is not on the path.
pub fn backpropagate(tree: &mut Tree, path: &[(NodeId, usize)], v: f64) {
    debug_assert!((0.0..=1.0).contains(&v), "leaf value {v} outside [0, 1]");
    for &(node, edge) in path {
        let n = tree.node_mut(node);
        n.edges[edge].stats.update(v);
        n.visits += 1;
    }
}
