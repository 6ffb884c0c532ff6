//! Selection scores.
//!
//! Under PUCT an unvisited edge has `Q = 0` and competes through its prior.
//! The UCT family scores unvisited edges `+∞`, so every child is tried once
//! before any is revisited. Ties go to the lowest position.

use super::config::{SearchConfig, Selection};
use super::tree::{EdgeStats, Node};

/// Score of one edge given its parent's visit count `N(s)`.
pub fn edge_score(stats: &EdgeStats, parent_visits: u32, cfg: &SearchConfig) -> f64 {
    let n_s = f64::from(parent_visits);
    let n_a = f64::from(stats.visits);
    let uct_bonus = || cfg.c * (n_s.ln() / n_a).sqrt();
    match cfg.selection {
        Selection::Puct => stats.q + cfg.c * stats.prior * n_s.sqrt() / (1.0 + n_a),
        _ if stats.visits == 0 => f64::INFINITY,
        Selection::Uct => stats.q + uct_bonus(),
        Selection::SpMcts => stats.q + uct_bonus() + cfg.w * stats.q_max + stats.sigma(),
        Selection::SpMix => (1.0 - cfg.lambda) * stats.q + cfg.lambda * stats.q_max + uct_bonus(),
    }
}

pub fn select_score(node: &Node, edge: usize, cfg: &SearchConfig) -> f64 {
    edge_score(&node.edges[edge].stats, node.visits, cfg)
}

/// Index of the highest-scoring edge; the first one wins ties.
pub fn select_edge(node: &Node, cfg: &SearchConfig) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..node.edges.len() {
        let s = select_score(node, i, cfg);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}
